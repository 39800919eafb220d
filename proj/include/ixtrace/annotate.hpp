#pragma once

// Human-readable path rendering: one line per hop with its resolved tag, and
// one interposed line per detection at the crossed link. Output is
// deterministic; the golden files under tests/data pin the exact layout.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ixtrace/engine.hpp"
#include "ixtrace/model.hpp"
#include "ixtrace/resolver.hpp"

namespace ixtrace {

namespace detail {

inline std::string hop_tag(const MergedDataset& d, const HopEvidence& ev) {
    auto ixp_name = [&](const std::string& id) {
        const auto* r = d.find_ixp(id);
        return r ? r->display_name : id;
    };
    switch (ev.kind) {
        case EvidenceKind::Triplet:
            return "IXP:" + ixp_name(ev.ixp_id) + ",AS" + std::to_string(ev.asns.front());
        case EvidenceKind::IxpPrefixOnly:
            return "IXP:" + ixp_name(ev.ixp_id);
        case EvidenceKind::OriginAs: {
            std::string tag = "AS";
            for (std::size_t i = 0; i < ev.asns.size(); ++i) {
                if (i) tag += ',';
                tag += std::to_string(ev.asns[i]);
            }
            return tag;
        }
        case EvidenceKind::Reserved:
        case EvidenceKind::Unknown:
            return "?";
    }
    return "?";
}

inline std::string detection_line(const MergedDataset& d, const Detection& det) {
    const auto* r = d.find_ixp(det.ixp_id);
    std::string name = r ? r->display_name : det.ixp_id;
    std::string attrs = "rule " + rule_name(det.rule) + ", " +
                        (det.strength == Strength::Strong ? "strong" : "weak");
    if (det.link == LinkSide::AOrB) attrs += ", ambiguous link";
    if (det.strength == Strength::Strong)
        return "=== IXP " + name + " crossed [" + attrs + "] ===";
    return "=== possible IXP crossing: " + name + " [" + attrs + "] ===";
}

}  // namespace detail

inline std::string annotate_path(const MergedDataset& d, const PrefixIndex& idx,
                                 const TraceroutePath& p, const std::vector<Detection>& dets) {
    std::ostringstream out;
    out << "path " << p.path_id;
    if (!p.target.empty()) out << " -> " << p.target;
    out << " (" << p.hops.size() << " hops)\n";

    // Detection lines go after the rendered hop that precedes the crossed
    // link: link A after hop window_start, link B / ambiguous after the
    // middle hop. Index 0 means the line precedes the first hop.
    auto after_hop = [](const Detection& det) {
        return det.link == LinkSide::A ? det.window_start : det.window_start + 1;
    };
    for (const auto& det : dets)
        if (after_hop(det) < 1) out << detail::detection_line(d, det) << "\n";

    for (const auto& h : p.hops) {
        char idxbuf[16];
        std::snprintf(idxbuf, sizeof idxbuf, "%2d", h.index);
        out << idxbuf << "  " << (h.address ? format_ipv4(*h.address) : "*") << "  ";
        if (h.rtt_ms) {
            char rttbuf[32];
            std::snprintf(rttbuf, sizeof rttbuf, "%.1f ms", *h.rtt_ms);
            out << rttbuf;
        } else {
            out << "*";
        }
        out << "  " << detail::hop_tag(d, resolve_ip(idx, h.address)) << "\n";
        for (const auto& det : dets)
            if (after_hop(det) == h.index) out << detail::detection_line(d, det) << "\n";
    }
    return out.str();
}

}  // namespace ixtrace
