#pragma once

// Cross-registry merging. Two records (one per source) are unified when they
// share an IXP prefix, share a (router IP, ASN) membership entry, or carry
// equal normalized names. Signal precedence when matches disagree:
// prefix > IP > name; weaker matches to a different partner are ignored.
//
// Conflicting data records are filtered, not fatal: an IP mapped to two ASNs
// or two IXPs loses all its triplets, a prefix claimed by two distinct merged
// records is dropped from both, and inactive IXPs disappear with all their
// data.

#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ixtrace/model.hpp"
#include "ixtrace/snapshot.hpp"

namespace ixtrace {

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a); b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }
private:
    std::vector<std::size_t> parent_;
};

struct MergeNode {
    Source source;
    const SnapshotIxp* ixp;
    std::string norm_name;
    std::set<Prefix> prefixes;
    std::set<std::pair<IpV4, Asn>> ip_asn;
    std::vector<const SnapshotMembership*> mems;
};

inline std::string origin_tag(Source s, const std::string& local) {
    return (s == Source::PDB ? std::string("pdb:") : std::string("pch:")) + local;
}

}  // namespace detail

inline MergedDataset merge_datasets(const RegistrySnapshot& pdb, const RegistrySnapshot& pch,
                                    std::vector<std::string>& warnings) {
    using detail::MergeNode;

    std::vector<MergeNode> nodes;
    auto add_source = [&](const RegistrySnapshot& snap) {
        std::map<std::string, std::size_t> by_local;
        for (const auto& x : snap.ixps) {
            MergeNode n{snap.source, &x, normalize_name(x.name), {}, {}, {}};
            n.prefixes.insert(x.prefixes.begin(), x.prefixes.end());
            by_local[x.local_id] = nodes.size();
            nodes.push_back(std::move(n));
        }
        for (const auto& m : snap.memberships) {
            auto& n = nodes[by_local.at(m.local_id)];
            n.mems.push_back(&m);
            for (IpV4 ip : m.ips) n.ip_asn.insert({ip, m.asn});
        }
    };
    add_source(pdb);
    add_source(pch);

    // Cross-source match candidates with their strongest signal:
    // 3 = identical prefix, 2 = identical (IP, ASN) entry, 1 = equal name.
    struct Pair { std::size_t a, b; int level; };
    std::vector<Pair> pairs;
    std::vector<int> best(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (nodes[i].source == nodes[j].source) continue;
            int level = 0;
            for (const auto& p : nodes[i].prefixes)
                if (nodes[j].prefixes.count(p)) { level = 3; break; }
            if (level < 2) {
                for (const auto& ia : nodes[i].ip_asn)
                    if (nodes[j].ip_asn.count(ia)) { level = 2; break; }
            }
            if (level < 1 && nodes[i].norm_name == nodes[j].norm_name) level = 1;
            if (level > 0) {
                pairs.push_back({i, j, level});
                best[i] = std::max(best[i], level);
                best[j] = std::max(best[j], level);
            }
        }
    }

    detail::UnionFind uf(nodes.size());
    for (const auto& p : pairs) {
        if (p.level == best[p.a] && p.level == best[p.b]) {
            uf.unite(p.a, p.b);
        } else {
            warnings.push_back("merge: ignoring weaker match between " +
                               detail::origin_tag(nodes[p.a].source, nodes[p.a].ixp->local_id) +
                               " and " +
                               detail::origin_tag(nodes[p.b].source, nodes[p.b].ixp->local_id));
        }
    }

    struct Group {
        std::vector<std::size_t> members;
        std::string ixp_id;
        bool active = true;
    };
    std::map<std::size_t, Group> groups;
    for (std::size_t i = 0; i < nodes.size(); ++i) groups[uf.find(i)].members.push_back(i);

    // Assign ids and handle inactivity; one source marking an IXP inactive
    // retires the whole merged record.
    std::map<std::string, Group*> by_id;
    for (auto& [root, g] : groups) {
        std::sort(g.members.begin(), g.members.end(), [&](std::size_t a, std::size_t b) {
            return std::make_pair(nodes[a].source, nodes[a].ixp->local_id) <
                   std::make_pair(nodes[b].source, nodes[b].ixp->local_id);
        });
        std::string id;
        for (std::size_t m : g.members) {
            if (!id.empty()) id += '+';
            id += detail::origin_tag(nodes[m].source, nodes[m].ixp->local_id);
            g.active = g.active && nodes[m].ixp->active;
        }
        g.ixp_id = id;
        by_id[id] = &g;
    }

    // Collect candidate data keyed for global conflict checks.
    struct TripletAgg { std::set<std::pair<std::string, Asn>> owners; std::map<std::pair<std::string, Asn>, SourceMask> masks; };
    std::map<IpV4, TripletAgg> by_ip;
    std::map<Prefix, std::map<std::string, SourceMask>> by_prefix;
    std::map<std::pair<std::string, Asn>, SourceMask> member_pairs;

    for (auto& [root, g] : groups) {
        if (!g.active) {
            warnings.push_back("merge: dropping inactive IXP " + g.ixp_id);
            continue;
        }
        for (std::size_t m : g.members) {
            const auto& n = nodes[m];
            SourceMask bit = mask_of(n.source);
            for (const auto& p : n.prefixes) by_prefix[p][g.ixp_id] |= bit;
            for (const auto* mem : n.mems) {
                member_pairs[{g.ixp_id, mem->asn}] |= bit;
                for (IpV4 ip : mem->ips) {
                    if (is_reserved(ip)) {
                        warnings.push_back("merge: dropping reserved triplet IP " + format_ipv4(ip));
                        continue;
                    }
                    auto& agg = by_ip[ip];
                    agg.owners.insert({g.ixp_id, mem->asn});
                    agg.masks[{g.ixp_id, mem->asn}] |= bit;
                }
            }
        }
    }

    std::vector<MembershipTriplet> triplets;
    for (const auto& [ip, agg] : by_ip) {
        std::set<std::string> owner_ixps;
        std::set<Asn> owner_asns;
        for (const auto& [ixp, asn] : agg.owners) { owner_ixps.insert(ixp); owner_asns.insert(asn); }
        if (owner_ixps.size() > 1 || owner_asns.size() > 1) {
            warnings.push_back("merge: dropping conflicting triplets for " + format_ipv4(ip));
            continue;
        }
        const auto& [owner, mask] = *agg.masks.begin();
        triplets.push_back({ip, owner.first, owner.second, mask});
    }

    std::vector<IxpPrefix> prefixes;
    for (const auto& [p, owners] : by_prefix) {
        if (owners.size() > 1) {
            warnings.push_back("merge: dropping prefix " + format_prefix(p) +
                               " claimed by multiple IXPs");
            continue;
        }
        prefixes.push_back({p, owners.begin()->first, owners.begin()->second});
    }

    std::vector<IxpRecord> records;
    for (const auto& [id, g] : by_id) {
        if (!g->active) continue;
        IxpRecord r;
        r.ixp_id = id;
        r.sources = 0;
        r.active = true;
        for (std::size_t m : g->members) {
            const auto& n = nodes[m];
            r.sources |= mask_of(n.source);
            r.names.insert(n.norm_name);
            r.origins.push_back({n.source, n.ixp->local_id, n.ixp->name});
            if (r.display_name.empty() || n.ixp->name < r.display_name)
                r.display_name = n.ixp->name;
        }
        records.push_back(std::move(r));
    }

    std::vector<MembershipPair> membership;
    for (const auto& [key, mask] : member_pairs) membership.push_back({key.first, key.second, mask});

    return MergedDataset(std::move(records), std::move(triplets), std::move(prefixes),
                         std::move(membership), {});
}

struct DatasetSummary {
    std::size_t ixps = 0;
    std::size_t prefixes = 0;
    std::size_t triplets = 0;
    std::size_t ixps_with_membership_data = 0;
    std::size_t ixps_with_prefix_data = 0;
};

inline DatasetSummary dataset_summary(const MergedDataset& d) {
    DatasetSummary s;
    s.ixps = d.ixps().size();
    s.prefixes = d.ixp_prefixes().size();
    s.triplets = d.triplets().size();
    std::set<std::string> with_mem, with_pfx;
    for (const auto& [ixp, by_asn] : d.membership())
        if (!by_asn.empty()) with_mem.insert(ixp);
    for (const auto& p : d.ixp_prefixes()) with_pfx.insert(p.ixp_id);
    s.ixps_with_membership_data = with_mem.size();
    s.ixps_with_prefix_data = with_pfx.size();
    return s;
}

// Canonical text form. Sorted and stable: equal datasets serialize to equal
// bytes regardless of how they were assembled.
inline std::string write_dataset(const MergedDataset& d) {
    std::ostringstream out;
    out << "IXDATA|1\n";
    for (const auto& [id, r] : d.ixps()) {
        out << "IXP|" << id << '|' << r.display_name << '|';
        bool first = true;
        for (const auto& n : r.names) {
            if (!first) out << ';';
            first = false;
            out << n;
        }
        out << '|' << format_sources(r.sources) << "\n";
    }
    auto prefixes = d.ixp_prefixes();
    std::sort(prefixes.begin(), prefixes.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ixp_id, a.prefix) < std::tie(b.ixp_id, b.prefix);
    });
    for (const auto& p : prefixes)
        out << "PFX|" << p.ixp_id << '|' << format_prefix(p.prefix) << '|'
            << format_sources(p.sources) << "\n";
    for (const auto& [ixp, by_asn] : d.membership())
        for (const auto& [asn, mask] : by_asn)
            out << "MEM|" << ixp << '|' << asn << '|' << format_sources(mask) << "\n";
    auto triplets = d.triplets();
    std::sort(triplets.begin(), triplets.end(),
              [](const auto& a, const auto& b) { return a.ip < b.ip; });
    for (const auto& t : triplets)
        out << "TRI|" << t.ixp_id << '|' << t.asn << '|' << format_ipv4(t.ip) << '|'
            << format_sources(t.sources) << "\n";
    for (const auto& m : d.as_mappings()) {
        out << "ASM|" << format_prefix(m.prefix) << '|';
        for (std::size_t i = 0; i < m.asns.size(); ++i) {
            if (i) out << ',';
            out << m.asns[i];
        }
        out << "\n";
    }
    return out.str();
}

// Rebuilds the per-source snapshot view of a merged dataset. Merging the two
// split halves again reproduces the dataset exactly.
inline RegistrySnapshot split_by_source(const MergedDataset& d, Source source) {
    RegistrySnapshot snap;
    snap.source = source;
    SourceMask bit = mask_of(source);

    std::map<std::string, std::string> local_of;  // ixp_id -> this source's local_id
    for (const auto& [id, r] : d.ixps()) {
        if (!(r.sources & bit)) continue;
        for (const auto& o : r.origins) {
            if (o.source != source) continue;
            local_of[id] = o.local_id;
            snap.ixps.push_back({o.local_id, o.raw_name, true, {}});
        }
    }
    std::map<std::string, SnapshotIxp*> by_local;
    for (auto& x : snap.ixps) by_local[x.local_id] = &x;

    for (const auto& p : d.ixp_prefixes()) {
        if (!(p.sources & bit)) continue;
        auto it = local_of.find(p.ixp_id);
        if (it != local_of.end()) by_local[it->second]->prefixes.push_back(p.prefix);
    }

    std::map<std::pair<std::string, Asn>, std::vector<IpV4>> ips_of;
    for (const auto& t : d.triplets())
        if (t.sources & bit) ips_of[{t.ixp_id, t.asn}].push_back(t.ip);

    for (const auto& [ixp, by_asn] : d.membership()) {
        auto it = local_of.find(ixp);
        if (it == local_of.end()) continue;
        for (const auto& [asn, mask] : by_asn) {
            if (!(mask & bit)) continue;
            SnapshotMembership m{it->second, asn, {}};
            auto ipit = ips_of.find({ixp, asn});
            if (ipit != ips_of.end()) m.ips = ipit->second;
            snap.memberships.push_back(std::move(m));
        }
    }
    return snap;
}

}  // namespace ixtrace
