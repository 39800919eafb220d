#pragma once

// Normalized registry snapshot files: the only interchange between the fetch
// clients and the merger. Line oriented, UTF-8, LF endings, '|' separated:
//
//   IXSNAP|<PDB|PCH>
//   # comment
//   IXP|local_id|name|active(0/1)
//   PFX|local_id|cidr
//   MEM|local_id|asn[|ip[,ip...]]
//
// Malformed records are rejected individually with a warning; a missing or
// unknown header is fatal.

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ixtrace/model.hpp"

namespace ixtrace {

struct SnapshotIxp {
    std::string local_id;
    std::string name;
    bool active = true;
    std::vector<Prefix> prefixes;
};

struct SnapshotMembership {
    std::string local_id;
    Asn asn = 0;
    std::vector<IpV4> ips;  // may be empty: membership without router addresses
};

struct RegistrySnapshot {
    Source source = Source::PDB;
    std::vector<SnapshotIxp> ixps;
    std::vector<SnapshotMembership> memberships;
};

inline RegistrySnapshot parse_snapshot(std::string_view text, Source expected,
                                       std::vector<std::string>& warnings) {
    RegistrySnapshot snap;
    std::vector<std::string> ixp_order;
    std::set<std::string> seen_ids;

    std::size_t pos = 0;
    int lineno = 0;
    bool have_header = false;
    // raw membership/prefix records linked to ixps after the full pass
    struct RawPfx { std::string local; Prefix p; int line; };
    struct RawMem { SnapshotMembership m; int line; };
    std::vector<RawPfx> pfxs;
    std::vector<RawMem> mems;
    std::map<std::string, std::size_t> ixp_index;

    auto warn = [&](int line, const std::string& msg) {
        warnings.push_back("line " + std::to_string(line) + ": " + msg);
    };

    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (line.empty() || line.front() == '#') continue;

        auto fields = detail::split_fields(line);
        if (!have_header) {
            if (fields.size() != 2 || fields[0] != "IXSNAP")
                throw DataError("snapshot header missing or malformed at line " +
                                std::to_string(lineno));
            auto src = source_from_name(fields[1]);
            if (!src) throw DataError("unknown snapshot source tag '" + std::string(fields[1]) + "'");
            if (*src != expected)
                throw DataError("snapshot source is " + source_name(*src) + ", expected " +
                                source_name(expected));
            snap.source = *src;
            have_header = true;
            continue;
        }

        if (fields[0] == "IXP") {
            if (fields.size() != 4) { warn(lineno, "IXP record needs 4 fields"); continue; }
            std::string local(fields[1]);
            std::string name(fields[2]);
            if (local.empty()) { warn(lineno, "empty local_id"); continue; }
            if (seen_ids.count(local)) { warn(lineno, "duplicate local_id '" + local + "'"); continue; }
            if (normalize_name(name).empty()) { warn(lineno, "IXP name is empty after normalization"); continue; }
            bool active;
            if (fields[3] == "1") active = true;
            else if (fields[3] == "0") active = false;
            else { warn(lineno, "active flag must be 0 or 1"); continue; }
            seen_ids.insert(local);
            ixp_index[local] = snap.ixps.size();
            snap.ixps.push_back({local, name, active, {}});
        } else if (fields[0] == "PFX") {
            if (fields.size() != 3) { warn(lineno, "PFX record needs 3 fields"); continue; }
            auto p = parse_prefix(fields[2]);
            if (!p) { warn(lineno, "bad CIDR '" + std::string(fields[2]) + "'"); continue; }
            if (p->len < 8 || p->len > 30) { warn(lineno, "IXP prefix length outside [8,30]"); continue; }
            pfxs.push_back({std::string(fields[1]), *p, lineno});
        } else if (fields[0] == "MEM") {
            if (fields.size() != 3 && fields.size() != 4) { warn(lineno, "MEM record needs 3 or 4 fields"); continue; }
            auto asn = detail::parse_asn(fields[2]);
            if (!asn) { warn(lineno, "bad ASN '" + std::string(fields[2]) + "'"); continue; }
            if (fields[1].empty()) { warn(lineno, "empty local_id"); continue; }
            SnapshotMembership m{std::string(fields[1]), *asn, {}};
            bool ok = true;
            if (fields.size() == 4 && !fields[3].empty()) {
                std::string_view ips = fields[3];
                std::size_t s = 0;
                while (s <= ips.size()) {
                    auto comma = ips.find(',', s);
                    auto tok = ips.substr(s, comma == std::string_view::npos ? ips.size() - s
                                                                             : comma - s);
                    s = comma == std::string_view::npos ? ips.size() + 1 : comma + 1;
                    auto ip = parse_ipv4(tok);
                    if (!ip) { warn(lineno, "bad IP '" + std::string(tok) + "'"); ok = false; break; }
                    m.ips.push_back(*ip);
                }
            }
            if (ok) mems.push_back({std::move(m), lineno});
        } else {
            warn(lineno, "unknown record type '" + std::string(fields[0]) + "'");
        }
    }
    if (!have_header) throw DataError("snapshot has no header line");

    for (auto& r : pfxs) {
        auto it = ixp_index.find(r.local);
        if (it == ixp_index.end()) { warn(r.line, "PFX references unknown local_id '" + r.local + "'"); continue; }
        snap.ixps[it->second].prefixes.push_back(r.p);
    }
    for (auto& r : mems) {
        if (!ixp_index.count(r.m.local_id)) { warn(r.line, "MEM references unknown local_id '" + r.m.local_id + "'"); continue; }
        snap.memberships.push_back(std::move(r.m));
    }
    return snap;
}

// Deterministic writer: IXP lines sorted by local_id, then PFX, then MEM.
inline std::string write_snapshot(const RegistrySnapshot& snap) {
    std::vector<const SnapshotIxp*> ixps;
    for (const auto& x : snap.ixps) ixps.push_back(&x);
    std::sort(ixps.begin(), ixps.end(),
              [](auto* a, auto* b) { return a->local_id < b->local_id; });

    std::ostringstream out;
    out << "IXSNAP|" << source_name(snap.source) << "\n";
    for (auto* x : ixps)
        out << "IXP|" << x->local_id << '|' << x->name << '|' << (x->active ? 1 : 0) << "\n";
    for (auto* x : ixps) {
        auto prefixes = x->prefixes;
        std::sort(prefixes.begin(), prefixes.end());
        for (const auto& p : prefixes) out << "PFX|" << x->local_id << '|' << format_prefix(p) << "\n";
    }
    auto mems = snap.memberships;
    std::sort(mems.begin(), mems.end(), [](const auto& a, const auto& b) {
        return std::tie(a.local_id, a.asn) < std::tie(b.local_id, b.asn);
    });
    for (const auto& m : mems) {
        out << "MEM|" << m.local_id << '|' << m.asn;
        auto ips = m.ips;
        std::sort(ips.begin(), ips.end());
        ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
        if (!ips.empty()) {
            out << '|';
            for (std::size_t i = 0; i < ips.size(); ++i) {
                if (i) out << ',';
                out << format_ipv4(ips[i]);
            }
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace ixtrace
