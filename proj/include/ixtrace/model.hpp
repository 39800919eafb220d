#pragma once

// Domain types shared by ingestion, resolution, detection and analytics.
// Everything here is an immutable value type once constructed.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ixtrace/ip.hpp"

namespace ixtrace {

// Fatal problems with input data (bad file, broken invariant). CLI maps
// these to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Failures of external machinery (subprocess, network). Exit code 3.
struct ExternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto bar = line.find('|', start);
        if (bar == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, bar - start));
        start = bar + 1;
    }
}

inline std::optional<Asn> parse_asn(std::string_view s) {
    if (s.empty() || s.size() > 10) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (v == 0 || v > 0xffffffffULL) return std::nullopt;
    return static_cast<Asn>(v);
}

}  // namespace detail

enum class Source : unsigned { PDB = 1, PCH = 2 };

using SourceMask = unsigned;

inline SourceMask mask_of(Source s) { return static_cast<unsigned>(s); }

inline std::string source_name(Source s) {
    return s == Source::PDB ? "PDB" : "PCH";
}

inline std::optional<Source> source_from_name(std::string_view s) {
    if (s == "PDB") return Source::PDB;
    if (s == "PCH") return Source::PCH;
    return std::nullopt;
}

inline std::string format_sources(SourceMask m) {
    std::string out;
    if (m & mask_of(Source::PDB)) out += "PDB";
    if (m & mask_of(Source::PCH)) {
        if (!out.empty()) out += ',';
        out += "PCH";
    }
    return out;
}

// Canonical form used for cross-registry name matching: lowercase, punctuation
// stripped, internal whitespace collapsed to single spaces, ends trimmed.
// "Foo-IX" and "FooIX" both normalize to "fooix".
inline std::string normalize_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        } else if (std::isspace(c)) {
            pending_space = true;
        }
        // punctuation dropped without inserting a space
    }
    return out;
}

// Where a merged record came from: one entry per contributing registry row.
struct OriginRef {
    Source source = Source::PDB;
    std::string local_id;
    std::string raw_name;  // verbatim name as that registry listed it
};

// One IXP as seen by the merged registry view. `ixp_id` is assigned by the
// merger (registries do not share identifiers); it encodes the contributing
// per-source local ids so a merged dataset can be split back by source.
struct IxpRecord {
    std::string ixp_id;
    std::string display_name;     // verbatim registry name, chosen deterministically
    std::set<std::string> names;  // normalized, non-empty
    std::vector<OriginRef> origins;  // sorted by (source, local_id)
    SourceMask sources = 0;
    bool active = true;
};

// {IP address -> IXP, AS}: the exact interface address of a member's BGP
// router on the IXP subnet.
struct MembershipTriplet {
    IpV4 ip = 0;
    std::string ixp_id;
    Asn asn = 0;
    SourceMask sources = 0;
};

struct IxpPrefix {
    Prefix prefix;  // length within [8, 30]
    std::string ixp_id;
    SourceMask sources = 0;
};

struct AsMapping {
    Prefix prefix;
    std::vector<Asn> asns;  // sorted, unique, non-empty; size > 1 = multi-origin
};

struct MembershipPair {
    std::string ixp_id;
    Asn asn = 0;
    SourceMask sources = 0;
};

// The merged registry view plus the prefix->AS table. Validated on
// construction and read-only afterwards; safe to share across threads.
class MergedDataset {
public:
    MergedDataset() = default;

    MergedDataset(std::vector<IxpRecord> ixps, std::vector<MembershipTriplet> triplets,
                  std::vector<IxpPrefix> ixp_prefixes, std::vector<MembershipPair> memberships,
                  std::vector<AsMapping> as_mappings)
        : triplets_(std::move(triplets)),
          ixp_prefixes_(std::move(ixp_prefixes)),
          as_mappings_(std::move(as_mappings)) {
        for (auto& r : ixps) {
            if (r.names.empty()) throw DataError("IXP record '" + r.ixp_id + "' has no names");
            auto [it, fresh] = ixps_.emplace(r.ixp_id, std::move(r));
            if (!fresh) throw DataError("duplicate ixp_id '" + it->first + "'");
        }
        auto check_ref = [&](const std::string& id) {
            if (!ixps_.count(id)) throw DataError("dangling ixp_id reference '" + id + "'");
        };
        for (const auto& p : ixp_prefixes_) check_ref(p.ixp_id);
        for (const auto& m : memberships) {
            check_ref(m.ixp_id);
            auto& entry = membership_[m.ixp_id][m.asn];
            entry |= m.sources;
        }
        // A triplet implies membership of its AS at its IXP.
        for (const auto& t : triplets_) {
            check_ref(t.ixp_id);
            membership_[t.ixp_id][t.asn] |= t.sources;
        }
    }

    const std::map<std::string, IxpRecord>& ixps() const { return ixps_; }
    const std::vector<MembershipTriplet>& triplets() const { return triplets_; }
    const std::vector<IxpPrefix>& ixp_prefixes() const { return ixp_prefixes_; }
    const std::vector<AsMapping>& as_mappings() const { return as_mappings_; }
    const std::map<std::string, std::map<Asn, SourceMask>>& membership() const { return membership_; }

    const IxpRecord* find_ixp(const std::string& id) const {
        auto it = ixps_.find(id);
        return it == ixps_.end() ? nullptr : &it->second;
    }

    bool is_member(Asn asn, const std::string& ixp_id) const {
        auto it = membership_.find(ixp_id);
        if (it == membership_.end()) throw DataError("unknown ixp_id '" + ixp_id + "'");
        return it->second.count(asn) != 0;
    }

private:
    std::map<std::string, IxpRecord> ixps_;
    std::vector<MembershipTriplet> triplets_;
    std::vector<IxpPrefix> ixp_prefixes_;
    std::vector<AsMapping> as_mappings_;
    std::map<std::string, std::map<Asn, SourceMask>> membership_;
};

inline MergedDataset with_as_mappings(const MergedDataset& d, std::vector<AsMapping> mappings) {
    std::vector<IxpRecord> ixps;
    for (const auto& [id, r] : d.ixps()) ixps.push_back(r);
    std::vector<MembershipPair> pairs;
    for (const auto& [ixp, by_asn] : d.membership())
        for (const auto& [asn, mask] : by_asn) pairs.push_back({ixp, asn, mask});
    return MergedDataset(std::move(ixps), d.triplets(), d.ixp_prefixes(), std::move(pairs),
                         std::move(mappings));
}

// One traceroute measurement. Hop indices run 1..n with no gaps; a hop that
// never answered keeps its slot with an empty address.
struct Hop {
    int index = 0;
    std::optional<IpV4> address;   // nullopt = no reply
    std::optional<double> rtt_ms;
};

struct TraceroutePath {
    std::string path_id;
    std::string target;
    std::vector<Hop> hops;
};

enum class EvidenceKind { Triplet, IxpPrefixOnly, OriginAs, Reserved, Unknown };

// Per-hop resolution result. Exactly one kind; fields beyond `kind` are
// meaningful only for the kinds that set them.
struct HopEvidence {
    EvidenceKind kind = EvidenceKind::Unknown;
    std::string ixp_id;           // Triplet, IxpPrefixOnly
    std::vector<Asn> asns;        // Triplet: exactly one; OriginAs: sorted origin set

    bool is_ixp_evidence() const {
        return kind == EvidenceKind::Triplet || kind == EvidenceKind::IxpPrefixOnly;
    }

    static HopEvidence triplet(std::string ixp, Asn asn) {
        return {EvidenceKind::Triplet, std::move(ixp), {asn}};
    }
    static HopEvidence ixp_prefix(std::string ixp) {
        return {EvidenceKind::IxpPrefixOnly, std::move(ixp), {}};
    }
    static HopEvidence origin_as(std::vector<Asn> asns) {
        return {EvidenceKind::OriginAs, {}, std::move(asns)};
    }
    static HopEvidence reserved() { return {EvidenceKind::Reserved, {}, {}}; }
    static HopEvidence unknown() { return {EvidenceKind::Unknown, {}, {}}; }

    friend bool operator==(const HopEvidence&, const HopEvidence&) = default;
};

inline std::string evidence_kind_name(EvidenceKind k) {
    switch (k) {
        case EvidenceKind::Triplet: return "triplet";
        case EvidenceKind::IxpPrefixOnly: return "ixp_prefix";
        case EvidenceKind::OriginAs: return "origin_as";
        case EvidenceKind::Reserved: return "reserved";
        case EvidenceKind::Unknown: return "unknown";
    }
    return "unknown";
}

enum class RuleId {
    R1_1, R1_2, R1_3, R1_4, R1_5, R1_6, R1_7, R2_0,
    OtherStrong,  // undocumented combination, triplet-backed with a member neighbor
    OtherWeak,    // remaining undocumented combinations
};

enum class LinkSide { A, B, AOrB };
enum class Strength { Strong, Weak };

inline Strength strength_of(RuleId r) {
    switch (r) {
        case RuleId::R1_1:
        case RuleId::R1_2:
        case RuleId::R1_3:
        case RuleId::R2_0:
        case RuleId::OtherStrong: return Strength::Strong;
        default: return Strength::Weak;
    }
}

inline std::string rule_name(RuleId r) {
    switch (r) {
        case RuleId::R1_1: return "R1.1";
        case RuleId::R1_2: return "R1.2";
        case RuleId::R1_3: return "R1.3";
        case RuleId::R1_4: return "R1.4";
        case RuleId::R1_5: return "R1.5";
        case RuleId::R1_6: return "R1.6";
        case RuleId::R1_7: return "R1.7";
        case RuleId::R2_0: return "R2.0";
        case RuleId::OtherStrong: return "other-strong";
        case RuleId::OtherWeak: return "other-weak";
    }
    return "?";
}

inline std::string link_name(LinkSide l) {
    switch (l) {
        case LinkSide::A: return "a";
        case LinkSide::B: return "b";
        case LinkSide::AOrB: return "a_or_b";
    }
    return "?";
}

// One detected IXP crossing. The firing window spans hops
// (window_start, window_start+1, window_start+2); window_start may be 0 when
// the window is padded on the left so that hop 1 sits in the middle. Link A
// is the link between hops window_start and window_start+1, link B the one
// after the middle hop.
struct Detection {
    std::string path_id;
    int window_start = 0;
    RuleId rule = RuleId::OtherWeak;
    std::string ixp_id;
    LinkSide link = LinkSide::AOrB;
    Strength strength = Strength::Weak;

    friend bool operator==(const Detection&, const Detection&) = default;
};

}  // namespace ixtrace
