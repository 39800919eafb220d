#pragma once

// Thin registry fetch clients. They pull the remote data, normalize it into
// a RegistrySnapshot and stop there: the snapshot file is the only thing the
// rest of the pipeline ever consumes.
//
// Expected endpoints, relative to the configured base URL:
//   PDB:  /api/ix       {"data":[{"id":1,"name":"...","status":"ok"}]}
//         /api/ixpfx    {"data":[{"ix_id":1,"protocol":"IPv4","prefix":"cidr"}]}
//         /api/netixlan {"data":[{"ix_id":1,"asn":64500,"ipaddr4":"a.b.c.d"}]}
//   PCH:  /ixps.json    [{"id":7,"name":"...","active":true,
//                         "prefixes":["cidr"],"members":[{"asn":1,"ips":["a.b.c.d"]}]}]
//
// Records with missing or unusable fields are skipped with a warning so a
// drifting schema degrades into a partial snapshot instead of a failure.

#ifndef IXTRACE_NO_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

#include <map>
#include <string>
#include <vector>

#include "ixtrace/model.hpp"
#include "ixtrace/snapshot.hpp"

namespace ixtrace {

struct FetchConfig {
    std::string base_url;  // scheme://host[:port]
    int retries = 3;
    int timeout_sec = 20;
};

namespace detail {

inline nlohmann::json http_get_json(const FetchConfig& cfg, const std::string& path) {
    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_sec);
    client.set_read_timeout(cfg.timeout_sec);
    client.set_follow_location(true);

    std::string last;
    for (int attempt = 0; attempt < std::max(1, cfg.retries); ++attempt) {
        auto res = client.Get(path);
        if (!res) {
            last = "no response (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status != 200) {
            last = "HTTP " + std::to_string(res->status);
            continue;
        }
        auto body = nlohmann::json::parse(res->body, nullptr, false);
        if (body.is_discarded()) {
            last = "response is not JSON";
            continue;
        }
        return body;
    }
    throw ExternalError("GET " + cfg.base_url + path + " failed after " +
                        std::to_string(std::max(1, cfg.retries)) + " attempts: " + last);
}

inline RegistrySnapshot fetch_pdb(const FetchConfig& cfg, std::vector<std::string>& warnings) {
    RegistrySnapshot snap;
    snap.source = Source::PDB;
    std::map<long long, std::size_t> by_id;

    auto ix = http_get_json(cfg, "/api/ix");
    for (const auto& rec : ix.value("data", nlohmann::json::array())) {
        if (!rec.contains("id") || !rec["id"].is_number_integer() || !rec.contains("name") ||
            !rec["name"].is_string()) {
            warnings.push_back("pdb: ix record missing id/name, skipped");
            continue;
        }
        long long id = rec["id"].get<long long>();
        std::string name = rec["name"].get<std::string>();
        if (normalize_name(name).empty()) {
            warnings.push_back("pdb: ix " + std::to_string(id) + " has unusable name, skipped");
            continue;
        }
        bool active = rec.value("status", "ok") == std::string("ok");
        by_id[id] = snap.ixps.size();
        snap.ixps.push_back({std::to_string(id), name, active, {}});
    }

    auto pfx = http_get_json(cfg, "/api/ixpfx");
    for (const auto& rec : pfx.value("data", nlohmann::json::array())) {
        if (rec.value("protocol", "IPv4") != std::string("IPv4")) continue;
        if (!rec.contains("ix_id") || !rec["ix_id"].is_number_integer() ||
            !rec.contains("prefix") || !rec["prefix"].is_string()) {
            warnings.push_back("pdb: ixpfx record missing ix_id/prefix, skipped");
            continue;
        }
        auto it = by_id.find(rec["ix_id"].get<long long>());
        auto parsed = parse_prefix(rec["prefix"].get<std::string>());
        if (it == by_id.end() || !parsed) {
            warnings.push_back("pdb: ixpfx record unusable, skipped");
            continue;
        }
        snap.ixps[it->second].prefixes.push_back(*parsed);
    }

    auto lan = http_get_json(cfg, "/api/netixlan");
    std::map<std::pair<long long, Asn>, SnapshotMembership> members;
    for (const auto& rec : lan.value("data", nlohmann::json::array())) {
        if (!rec.contains("ix_id") || !rec["ix_id"].is_number_integer() || !rec.contains("asn") ||
            !rec["asn"].is_number_integer()) {
            warnings.push_back("pdb: netixlan record missing ix_id/asn, skipped");
            continue;
        }
        long long id = rec["ix_id"].get<long long>();
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            warnings.push_back("pdb: netixlan references unknown ix " + std::to_string(id));
            continue;
        }
        Asn asn = rec["asn"].get<Asn>();
        auto& m = members.try_emplace({id, asn}, SnapshotMembership{std::to_string(id), asn, {}})
                      .first->second;
        if (rec.contains("ipaddr4") && rec["ipaddr4"].is_string()) {
            auto ip = parse_ipv4(rec["ipaddr4"].get<std::string>());
            if (ip) m.ips.push_back(*ip);
            else warnings.push_back("pdb: bad ipaddr4 for ix " + std::to_string(id));
        }
    }
    for (auto& [key, m] : members) snap.memberships.push_back(std::move(m));
    return snap;
}

inline RegistrySnapshot fetch_pch(const FetchConfig& cfg, std::vector<std::string>& warnings) {
    RegistrySnapshot snap;
    snap.source = Source::PCH;
    auto body = http_get_json(cfg, "/ixps.json");
    if (!body.is_array()) throw ExternalError("pch: /ixps.json is not an array");
    for (const auto& rec : body) {
        if (!rec.contains("id") || !rec["id"].is_number_integer() || !rec.contains("name") ||
            !rec["name"].is_string()) {
            warnings.push_back("pch: record missing id/name, skipped");
            continue;
        }
        std::string local = std::to_string(rec["id"].get<long long>());
        std::string name = rec["name"].get<std::string>();
        if (normalize_name(name).empty()) {
            warnings.push_back("pch: ixp " + local + " has unusable name, skipped");
            continue;
        }
        SnapshotIxp ixp{local, name, rec.value("active", true), {}};
        for (const auto& p : rec.value("prefixes", nlohmann::json::array())) {
            auto parsed = p.is_string() ? parse_prefix(p.get<std::string>()) : std::nullopt;
            if (parsed) ixp.prefixes.push_back(*parsed);
            else warnings.push_back("pch: bad prefix for ixp " + local);
        }
        snap.ixps.push_back(std::move(ixp));
        for (const auto& m : rec.value("members", nlohmann::json::array())) {
            if (!m.contains("asn") || !m["asn"].is_number_integer()) {
                warnings.push_back("pch: member without asn for ixp " + local);
                continue;
            }
            SnapshotMembership mem{local, m["asn"].get<Asn>(), {}};
            for (const auto& ip : m.value("ips", nlohmann::json::array())) {
                auto parsed = ip.is_string() ? parse_ipv4(ip.get<std::string>()) : std::nullopt;
                if (parsed) mem.ips.push_back(*parsed);
                else warnings.push_back("pch: bad member IP for ixp " + local);
            }
            snap.memberships.push_back(std::move(mem));
        }
    }
    return snap;
}

}  // namespace detail

inline RegistrySnapshot fetch_registry(Source source, const FetchConfig& cfg,
                                       std::vector<std::string>& warnings) {
    if (cfg.base_url.empty()) throw DataError("fetch: no base URL configured");
    return source == Source::PDB ? detail::fetch_pdb(cfg, warnings)
                                 : detail::fetch_pch(cfg, warnings);
}

}  // namespace ixtrace
