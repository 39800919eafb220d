#pragma once

// Corpus-level reporting over detection results: path statistics, IXP
// rankings, per-rule hit rates, members-vs-paths export with Pearson
// correlation, and validation of registry triplets against BGP route
// collector tuples.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ixtrace/engine.hpp"
#include "ixtrace/model.hpp"
#include "ixtrace/resolver.hpp"

namespace ixtrace {

struct PathResult {
    TraceroutePath path;
    std::vector<Detection> detections;
};

struct CorpusStats {
    std::size_t paths = 0;
    double pct_paths_with_ixp = 0.0;
    double avg_ixps_per_ixp_path = 0.0;  // distinct IXPs, over IXP paths only
    double avg_hops_per_path = 0.0;
    double avg_ixp_hop = 0.0;            // 1-based index of the IXP-evidence hop
    double avg_ases_per_path = 0.0;      // distinct resolved ASNs per path
};

inline CorpusStats compute_stats(const std::vector<PathResult>& results, const PrefixIndex& idx) {
    if (results.empty()) throw DataError("compute_stats: empty corpus");
    CorpusStats s;
    s.paths = results.size();
    std::size_t ixp_paths = 0;
    double sum_distinct_ixps = 0;
    double sum_hops = 0;
    double sum_ixp_hop = 0;
    std::size_t detections = 0;
    double sum_ases = 0;
    for (const auto& r : results) {
        sum_hops += static_cast<double>(r.path.hops.size());
        if (!r.detections.empty()) {
            ++ixp_paths;
            std::set<std::string> distinct;
            for (const auto& det : r.detections) distinct.insert(det.ixp_id);
            sum_distinct_ixps += static_cast<double>(distinct.size());
        }
        for (const auto& det : r.detections) {
            sum_ixp_hop += det.window_start + 1;  // middle hop of the firing window
            ++detections;
        }
        std::set<Asn> ases;
        for (const auto& h : r.path.hops) {
            auto ev = resolve_ip(idx, h.address);
            for (Asn a : ev.asns) ases.insert(a);
        }
        sum_ases += static_cast<double>(ases.size());
    }
    s.pct_paths_with_ixp = 100.0 * static_cast<double>(ixp_paths) / static_cast<double>(s.paths);
    s.avg_ixps_per_ixp_path = ixp_paths ? sum_distinct_ixps / static_cast<double>(ixp_paths) : 0.0;
    s.avg_hops_per_path = sum_hops / static_cast<double>(s.paths);
    s.avg_ixp_hop = detections ? sum_ixp_hop / static_cast<double>(detections) : 0.0;
    s.avg_ases_per_path = sum_ases / static_cast<double>(s.paths);
    return s;
}

struct RankedIxp {
    std::string ixp_id;
    std::size_t path_count = 0;    // a path counts once per distinct IXP on it
    std::size_t member_count = 0;
};

inline std::vector<RankedIxp> rank_ixps(const MergedDataset& d,
                                        const std::vector<PathResult>& results) {
    std::map<std::string, std::size_t> paths_per_ixp;
    for (const auto& r : results) {
        std::set<std::string> distinct;
        for (const auto& det : r.detections) distinct.insert(det.ixp_id);
        for (const auto& ixp : distinct) ++paths_per_ixp[ixp];
    }
    std::vector<RankedIxp> out;
    for (const auto& [ixp, count] : paths_per_ixp) {
        std::size_t members = 0;
        auto it = d.membership().find(ixp);
        if (it != d.membership().end()) members = it->second.size();
        out.push_back({ixp, count, members});
    }
    std::sort(out.begin(), out.end(), [](const RankedIxp& a, const RankedIxp& b) {
        if (a.path_count != b.path_count) return a.path_count > b.path_count;
        if (a.member_count != b.member_count) return a.member_count > b.member_count;
        return a.ixp_id < b.ixp_id;
    });
    return out;
}

// Percentage of all detections per rule; entries sum to 100 within rounding.
inline std::map<RuleId, double> rule_hit_rates(const std::vector<PathResult>& results) {
    std::map<RuleId, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& r : results)
        for (const auto& det : r.detections) {
            ++counts[det.rule];
            ++total;
        }
    if (total == 0) throw DataError("rule_hit_rates: no detections");
    std::map<RuleId, double> out;
    for (const auto& [rule, c] : counts)
        out[rule] = 100.0 * static_cast<double>(c) / static_cast<double>(total);
    return out;
}

// One-pass co-moment accumulation. Undefined for fewer than two points or
// zero variance on either axis.
inline std::optional<double> pearson(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) return std::nullopt;
    double mean_x = 0, mean_y = 0, sxx = 0, syy = 0, sxy = 0;
    double n = 0;
    for (const auto& [x, y] : pts) {
        n += 1;
        double dx = x - mean_x;
        double dy = y - mean_y;
        mean_x += dx / n;
        mean_y += dy / n;
        sxx += dx * (x - mean_x);
        syy += dy * (y - mean_y);
        sxy += dx * (y - mean_y);
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

struct MembersPathsExport {
    std::string csv;  // header ixp_id,members,paths
    std::optional<double> correlation;
};

inline MembersPathsExport members_paths_export(const std::vector<RankedIxp>& ranking) {
    std::ostringstream csv;
    csv << "ixp_id,members,paths\n";
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : ranking) {
        csv << r.ixp_id << ',' << r.member_count << ',' << r.path_count << "\n";
        pts.emplace_back(static_cast<double>(r.member_count), static_cast<double>(r.path_count));
    }
    return {csv.str(), pearson(pts)};
}

// A (IXP, AS, next-hop IP) observation extracted from a route collector
// session at an IXP.
struct BgpTuple {
    std::string ixp_id;
    Asn asn = 0;
    IpV4 ip = 0;
};

// Input lines: BGP|ixp_name_or_id|asn|ip. Names are matched through the same
// normalization as the merger.
inline std::vector<BgpTuple> parse_bgp_tuples(std::string_view text, const MergedDataset& d,
                                              std::vector<std::string>& warnings) {
    std::map<std::string, std::string> by_name;
    std::set<std::string> ambiguous;
    for (const auto& [id, r] : d.ixps())
        for (const auto& n : r.names) {
            auto [it, fresh] = by_name.emplace(n, id);
            if (!fresh && it->second != id) ambiguous.insert(n);
        }

    std::vector<BgpTuple> out;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        auto warn = [&](const std::string& msg) {
            warnings.push_back("bgp line " + std::to_string(lineno) + ": " + msg);
        };
        auto fields = detail::split_fields(line);
        if (fields.size() != 4 || fields[0] != "BGP") { warn("expected BGP|ixp|asn|ip"); continue; }
        std::string ixp(fields[1]);
        if (!d.find_ixp(ixp)) {
            auto norm = normalize_name(ixp);
            if (ambiguous.count(norm)) { warn("ambiguous IXP name '" + ixp + "'"); continue; }
            auto it = by_name.find(norm);
            if (it == by_name.end()) { warn("unknown IXP '" + ixp + "'"); continue; }
            ixp = it->second;
        }
        auto asn = detail::parse_asn(fields[2]);
        if (!asn) { warn("bad ASN"); continue; }
        auto ip = parse_ipv4(fields[3]);
        if (!ip) { warn("bad IP"); continue; }
        out.push_back({std::move(ixp), *asn, *ip});
    }
    return out;
}

struct ConsistencyReport {
    std::size_t common_tuples = 0;
    std::optional<double> pct_consistent;  // empty when there is no overlap
};

// For each source: take the (IXP, AS) pairs that appear both in that
// source's triplets and in the BGP tuples; a pair is consistent when any of
// its triplet IPs shows up among the BGP next-hop IPs for the pair.
inline std::map<Source, ConsistencyReport> consistency_check(const MergedDataset& d,
                                                             const std::vector<BgpTuple>& bgp) {
    std::map<std::pair<std::string, Asn>, std::set<IpV4>> bgp_ips;
    for (const auto& t : bgp) bgp_ips[{t.ixp_id, t.asn}].insert(t.ip);

    std::map<Source, ConsistencyReport> out;
    for (Source source : {Source::PDB, Source::PCH}) {
        std::map<std::pair<std::string, Asn>, std::set<IpV4>> triplet_ips;
        for (const auto& t : d.triplets())
            if (t.sources & mask_of(source)) triplet_ips[{t.ixp_id, t.asn}].insert(t.ip);

        std::size_t common = 0, consistent = 0;
        for (const auto& [key, ips] : triplet_ips) {
            auto it = bgp_ips.find(key);
            if (it == bgp_ips.end()) continue;
            ++common;
            for (IpV4 ip : ips)
                if (it->second.count(ip)) { ++consistent; break; }
        }
        ConsistencyReport rep;
        rep.common_tuples = common;
        if (common)
            rep.pct_consistent = 100.0 * static_cast<double>(consistent) / static_cast<double>(common);
        out[source] = rep;
    }
    return out;
}

}  // namespace ixtrace
