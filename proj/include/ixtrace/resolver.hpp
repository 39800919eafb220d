#pragma once

// Address classification: exact triplet match, longest-prefix match over IXP
// prefixes, longest-prefix match over the prefix->AS table, and the IANA
// special-purpose filter. Built once from a MergedDataset, read-only after.

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ixtrace/model.hpp"

namespace ixtrace {

// Bitwise binary trie keyed by prefix bits; lookup walks the address and
// remembers the deepest stored value.
template <typename T>
class PrefixTrie {
public:
    PrefixTrie() { nodes_.push_back({}); }

    // Returns false when the exact (net, len) slot was already occupied; the
    // new value replaces the old one (last wins).
    bool insert(const Prefix& p, T value) {
        std::size_t cur = 0;
        for (int depth = 0; depth < p.len; ++depth) {
            int bit = (p.net >> (31 - depth)) & 1;
            std::size_t next = nodes_[cur].child[bit];
            if (next == 0) {
                next = nodes_.size();
                nodes_[cur].child[bit] = next;
                nodes_.push_back({});
            }
            cur = next;
        }
        bool fresh = !nodes_[cur].occupied;
        nodes_[cur].occupied = true;
        nodes_[cur].value = std::move(value);
        return fresh;
    }

    const T* longest_match(IpV4 addr) const {
        const T* found = nullptr;
        std::size_t cur = 0;
        if (nodes_[0].occupied) found = &nodes_[0].value;
        for (int depth = 0; depth < 32; ++depth) {
            int bit = (addr >> (31 - depth)) & 1;
            std::size_t next = nodes_[cur].child[bit];
            if (next == 0) break;
            cur = next;
            if (nodes_[cur].occupied) found = &nodes_[cur].value;
        }
        return found;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& node : nodes_) n += node.occupied ? 1 : 0;
        return n;
    }

private:
    struct Node {
        std::size_t child[2] = {0, 0};
        bool occupied = false;
        T value{};
    };
    std::vector<Node> nodes_;
};

class PrefixIndex {
public:
    PrefixIndex() = default;

    const MembershipTriplet* triplet_for(IpV4 ip) const {
        auto it = triplet_map_.find(ip);
        return it == triplet_map_.end() ? nullptr : &it->second;
    }
    const std::string* ixp_prefix_for(IpV4 ip) const { return ixp_trie_.longest_match(ip); }
    const std::vector<Asn>* origin_asns_for(IpV4 ip) const { return as_trie_.longest_match(ip); }

    std::size_t triplet_count() const { return triplet_map_.size(); }
    std::size_t ixp_prefix_count() const { return ixp_trie_.size(); }
    std::size_t as_prefix_count() const { return as_trie_.size(); }

    friend PrefixIndex build_index(const MergedDataset& d, std::vector<std::string>& warnings);

private:
    PrefixTrie<std::string> ixp_trie_;       // prefix -> ixp_id
    PrefixTrie<std::vector<Asn>> as_trie_;   // prefix -> origin AS set
    std::unordered_map<IpV4, MembershipTriplet> triplet_map_;
};

inline PrefixIndex build_index(const MergedDataset& d, std::vector<std::string>& warnings) {
    PrefixIndex idx;
    for (const auto& t : d.triplets()) idx.triplet_map_.emplace(t.ip, t);
    for (const auto& p : d.ixp_prefixes()) idx.ixp_trie_.insert(p.prefix, p.ixp_id);
    for (const auto& m : d.as_mappings()) {
        if (!idx.as_trie_.insert(m.prefix, m.asns))
            warnings.push_back("as-map: duplicate prefix " + format_prefix(m.prefix) +
                               ", keeping last entry");
    }
    return idx;
}

// Total classification of one hop address. Precedence: no reply, then the
// reserved filter (it wins even over a misconfigured triplet), then exact
// triplet, then IXP prefix, then origin-AS lookup.
inline HopEvidence resolve_ip(const PrefixIndex& idx, std::optional<IpV4> ip) {
    if (!ip) return HopEvidence::unknown();
    if (is_reserved(*ip)) return HopEvidence::reserved();
    if (const auto* t = idx.triplet_for(*ip)) return HopEvidence::triplet(t->ixp_id, t->asn);
    if (const auto* x = idx.ixp_prefix_for(*ip)) return HopEvidence::ixp_prefix(*x);
    if (const auto* asns = idx.origin_asns_for(*ip)) return HopEvidence::origin_as(*asns);
    return HopEvidence::unknown();
}

enum class MembershipVerdict { Member, NonMember, Unknown };

// Any-of semantics over the candidate set: one member ASN is enough. An
// empty set means no AS could be resolved for the hop at all.
inline MembershipVerdict membership_of(const MergedDataset& d, const std::vector<Asn>& asns,
                                       const std::string& ixp_id) {
    if (!d.find_ixp(ixp_id)) throw DataError("unknown ixp_id '" + ixp_id + "'");
    if (asns.empty()) return MembershipVerdict::Unknown;
    auto it = d.membership().find(ixp_id);
    if (it != d.membership().end())
        for (Asn a : asns)
            if (it->second.count(a)) return MembershipVerdict::Member;
    return MembershipVerdict::NonMember;
}

// Prefix->AS table: lines "cidr|asn[,asn...]", '#' comments, LF endings.
inline std::vector<AsMapping> load_as_mappings(std::string_view text,
                                               std::vector<std::string>& warnings) {
    std::vector<AsMapping> out;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        auto bar = line.find('|');
        if (bar == std::string_view::npos) {
            warnings.push_back("as-map line " + std::to_string(lineno) + ": missing '|'");
            continue;
        }
        auto prefix = parse_prefix(line.substr(0, bar));
        if (!prefix) {
            warnings.push_back("as-map line " + std::to_string(lineno) + ": bad CIDR");
            continue;
        }
        std::vector<Asn> asns;
        std::string_view rest = line.substr(bar + 1);
        std::size_t s = 0;
        bool ok = !rest.empty();
        while (ok && s <= rest.size()) {
            auto comma = rest.find(',', s);
            auto tok = rest.substr(s, comma == std::string_view::npos ? rest.size() - s : comma - s);
            s = comma == std::string_view::npos ? rest.size() + 1 : comma + 1;
            std::uint64_t v = 0;
            ok = !tok.empty() && tok.size() <= 10;
            for (char c : tok) {
                if (c < '0' || c > '9') { ok = false; break; }
                v = v * 10 + static_cast<std::uint64_t>(c - '0');
            }
            if (v == 0 || v > 0xffffffffULL) ok = false;
            if (ok) asns.push_back(static_cast<Asn>(v));
        }
        if (!ok) {
            warnings.push_back("as-map line " + std::to_string(lineno) + ": bad ASN list");
            continue;
        }
        std::sort(asns.begin(), asns.end());
        asns.erase(std::unique(asns.begin(), asns.end()), asns.end());
        out.push_back({*prefix, std::move(asns)});
    }
    return out;
}

}  // namespace ixtrace
