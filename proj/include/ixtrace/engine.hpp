#pragma once

// IXP crossing inference over a traceroute path. A window of three hops
// slides along the path; the middle hop's IXP evidence (or a consecutive
// triplet pair) is tested against the membership of the adjacent ASes.
//
// Window geometry: window_start k spans hops (k, k+1, k+2); the candidate
// IXP address sits at k+1. Link A is the link (k, k+1) entering the IXP
// address, link B the link (k+1, k+2) leaving it. The ends of the path are
// padded with unknown evidence so the first and last hops still get a turn
// in the middle. The consecutive-pair rule fires when hops k+1 and k+2 both
// match triplets of the same IXP with different ASes; the window then skips
// ahead two so the second pair hop is not reported again.

#include <array>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ixtrace/model.hpp"
#include "ixtrace/resolver.hpp"

namespace ixtrace {

// Everything classify_window needs, detached from the dataset: evidence
// kinds, membership verdicts against the candidate IXP, and AS-set equality
// between the window positions. Two hops count as the "same AS" when their
// resolved AS sets intersect; a hop with no resolvable AS is never equal to
// anything and never a member of anything.
struct WindowFacts {
    std::array<EvidenceKind, 3> kind = {EvidenceKind::Unknown, EvidenceKind::Unknown,
                                        EvidenceKind::Unknown};
    std::string candidate_ixp;  // middle hop's IXP, empty when the middle has none
    bool pair_same_ixp = false;  // positions 1 and 2 are triplets of the same IXP
    std::array<MembershipVerdict, 3> member = {MembershipVerdict::Unknown,
                                               MembershipVerdict::Unknown,
                                               MembershipVerdict::Unknown};
    bool eq01 = false, eq12 = false, eq02 = false;
};

struct WindowRuleMatch {
    RuleId rule;
    LinkSide link;
};

inline WindowFacts window_facts(const MergedDataset& d, const HopEvidence& e0,
                                const HopEvidence& e1, const HopEvidence& e2) {
    WindowFacts f;
    f.kind = {e0.kind, e1.kind, e2.kind};
    const HopEvidence* ev[3] = {&e0, &e1, &e2};
    if (e1.is_ixp_evidence()) f.candidate_ixp = e1.ixp_id;
    f.pair_same_ixp = e1.kind == EvidenceKind::Triplet && e2.kind == EvidenceKind::Triplet &&
                      e1.ixp_id == e2.ixp_id;
    if (!f.candidate_ixp.empty())
        for (int i = 0; i < 3; ++i) f.member[i] = membership_of(d, ev[i]->asns, f.candidate_ixp);
    auto intersects = [](const std::vector<Asn>& a, const std::vector<Asn>& b) {
        for (Asn x : a)
            for (Asn y : b)
                if (x == y) return true;
        return false;
    };
    f.eq01 = intersects(e0.asns, e1.asns);
    f.eq12 = intersects(e1.asns, e2.asns);
    f.eq02 = intersects(e0.asns, e2.asns);
    return f;
}

// The rule table. At most one detection per window; windows without IXP
// evidence in the middle (or a consecutive pair) yield none. Combinations
// outside the documented rules still report, as other-strong (triplet middle
// with at least one member neighbor) or other-weak.
inline std::optional<WindowRuleMatch> classify_window(const WindowFacts& f) {
    const bool middle_triplet = f.kind[1] == EvidenceKind::Triplet;
    const bool middle_prefix = f.kind[1] == EvidenceKind::IxpPrefixOnly;

    if (f.pair_same_ixp && !f.eq12) return WindowRuleMatch{RuleId::R2_0, LinkSide::A};

    if (!middle_triplet && !middle_prefix) return std::nullopt;

    const bool m0 = f.member[0] == MembershipVerdict::Member;
    const bool m2 = f.member[2] == MembershipVerdict::Member;
    const bool adj_plain = f.kind[0] != EvidenceKind::Triplet &&
                           f.kind[0] != EvidenceKind::IxpPrefixOnly &&
                           f.kind[2] != EvidenceKind::Triplet &&
                           f.kind[2] != EvidenceKind::IxpPrefixOnly;

    if (middle_triplet && adj_plain) {
        if (m0 && m2 && f.eq12 && !f.eq02) return WindowRuleMatch{RuleId::R1_1, LinkSide::A};
        if (m0 && !m2 && !f.eq01 && !f.eq02) return WindowRuleMatch{RuleId::R1_2, LinkSide::A};
        if (m0 && m2 && !f.eq12 && !f.eq01 && !f.eq02)
            return WindowRuleMatch{RuleId::R1_3, LinkSide::AOrB};
        if (!m0 && m2 && f.eq12 && !f.eq02) return WindowRuleMatch{RuleId::R1_6, LinkSide::B};
        if (!m0 && !m2 && !f.eq01 && !f.eq12) return WindowRuleMatch{RuleId::R1_7, LinkSide::AOrB};
    }
    if (middle_prefix && adj_plain) {
        if (m0 && !m2) return WindowRuleMatch{RuleId::R1_4, LinkSide::A};
        if (!m0 && m2) return WindowRuleMatch{RuleId::R1_5, LinkSide::B};
    }
    if (middle_triplet && (m0 || m2)) return WindowRuleMatch{RuleId::OtherStrong, LinkSide::AOrB};
    return WindowRuleMatch{RuleId::OtherWeak, LinkSide::AOrB};
}

// Drops paths with no reply at all, and paths where an address shows up at
// two non-adjacent hops (routing loop). Adjacent repeats are normal.
inline std::optional<TraceroutePath> preprocess_path(const TraceroutePath& p) {
    bool any_reply = false;
    std::unordered_map<IpV4, int> last_seen;
    for (const auto& h : p.hops) {
        if (!h.address) continue;
        any_reply = true;
        auto it = last_seen.find(*h.address);
        if (it != last_seen.end() && h.index - it->second > 1) return std::nullopt;
        last_seen[*h.address] = h.index;
    }
    if (!any_reply) return std::nullopt;
    return p;
}

inline std::vector<Detection> detect_path(const PrefixIndex& idx, const MergedDataset& d,
                                          const TraceroutePath& p) {
    const int n = static_cast<int>(p.hops.size());
    if (n < 2) return {};

    std::vector<HopEvidence> ev(static_cast<std::size_t>(n) + 3);  // 1-based; 0 and n+1.. are pads
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i) + 1] = resolve_ip(idx, p.hops[static_cast<std::size_t>(i)].address);

    std::vector<Detection> out;
    int k = 0;
    while (k <= n - 1) {
        auto f = window_facts(d, ev[static_cast<std::size_t>(k)], ev[static_cast<std::size_t>(k) + 1],
                              ev[static_cast<std::size_t>(k) + 2]);
        if (auto m = classify_window(f)) {
            out.push_back({p.path_id, k, m->rule, f.candidate_ixp, m->link, strength_of(m->rule)});
            if (m->rule == RuleId::R2_0) {
                k += 2;
                continue;
            }
        }
        ++k;
    }
    return out;
}

}  // namespace ixtrace
