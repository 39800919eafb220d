#pragma once

// Machine-readable detection output: one JSON object per path.

#include <string>
#include <vector>

#include "json.hpp"

#include "ixtrace/engine.hpp"
#include "ixtrace/model.hpp"
#include "ixtrace/resolver.hpp"

namespace ixtrace {

inline nlohmann::json path_to_json(const MergedDataset& d, const PrefixIndex& idx,
                                   const TraceroutePath& p, const std::vector<Detection>& dets) {
    auto ixp_name = [&](const std::string& id) -> std::string {
        const auto* r = d.find_ixp(id);
        return r ? r->display_name : id;
    };

    nlohmann::json hops = nlohmann::json::array();
    for (const auto& h : p.hops) {
        nlohmann::json hop;
        hop["hop"] = h.index;
        if (h.address) hop["address"] = format_ipv4(*h.address);
        else hop["address"] = nullptr;
        if (h.rtt_ms) hop["rtt_ms"] = *h.rtt_ms;
        else hop["rtt_ms"] = nullptr;

        auto ev = resolve_ip(idx, h.address);
        nlohmann::json evidence;
        evidence["kind"] = evidence_kind_name(ev.kind);
        if (ev.kind == EvidenceKind::Triplet) {
            evidence["ixp_id"] = ev.ixp_id;
            evidence["ixp"] = ixp_name(ev.ixp_id);
            evidence["asn"] = ev.asns.front();
        } else if (ev.kind == EvidenceKind::IxpPrefixOnly) {
            evidence["ixp_id"] = ev.ixp_id;
            evidence["ixp"] = ixp_name(ev.ixp_id);
        } else if (ev.kind == EvidenceKind::OriginAs) {
            evidence["asns"] = ev.asns;
        }
        hop["evidence"] = evidence;
        hops.push_back(hop);
    }

    nlohmann::json detections = nlohmann::json::array();
    for (const auto& det : dets) {
        detections.push_back({{"rule", rule_name(det.rule)},
                              {"window_start", det.window_start},
                              {"link", link_name(det.link)},
                              {"strength", det.strength == Strength::Strong ? "strong" : "weak"},
                              {"ixp_id", det.ixp_id},
                              {"ixp", ixp_name(det.ixp_id)}});
    }

    nlohmann::json obj;
    obj["path_id"] = p.path_id;
    obj["target"] = p.target;
    obj["hops"] = hops;
    obj["detections"] = detections;
    return obj;
}

}  // namespace ixtrace
