// Acceptance suite: each criterion prints exactly one [PASS]/[FAIL] line.
// Run directly or through ctest; the process exits nonzero if any criterion
// fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ixtrace/analytics.hpp"
#include "ixtrace/annotate.hpp"
#include "ixtrace/engine.hpp"
#include "ixtrace/merge.hpp"
#include "ixtrace/resolver.hpp"
#include "ixtrace/snapshot.hpp"
#include "ixtrace/trace.hpp"

#include "fixtures.hpp"
#include "oracle_lpm.hpp"
#include "oracle_rules.hpp"

using namespace ixtrace;
namespace fs = std::filesystem;

namespace {

const std::string kTestData = IXTRACE_TEST_DATA;
const std::string kBin = IXTRACE_BIN;

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- 1: engine classification equals the independent decision table --------

void criterion_rule_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    auto space = testsupport::enumerate_fact_space();
    int conflicts = 0;
    std::size_t mismatches = 0;
    std::map<RuleId, std::size_t> fired;
    for (const auto& f : space) {
        auto expected = testsupport::oracle_classify(f, conflicts);
        auto actual = classify_window(f);
        bool same = expected.has_value() == actual.has_value() &&
                    (!expected || (expected->rule == actual->rule && expected->link == actual->link));
        if (!same) ++mismatches;
        if (actual) ++fired[actual->rule];
    }
    const RuleId documented[] = {RuleId::R1_1, RuleId::R1_2, RuleId::R1_3, RuleId::R1_4,
                                 RuleId::R1_5, RuleId::R1_6, RuleId::R1_7, RuleId::R2_0};
    std::size_t uncovered = 0;
    for (RuleId r : documented)
        if (fired[r] == 0) ++uncovered;
    double secs = seconds_since(t0);
    bool ok = mismatches == 0 && conflicts == 0 && uncovered == 0 && secs < 5.0;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "%zu fact points, %zu mismatches, %d rule overlaps, %zu uncovered rules, %.2fs",
                  space.size(), mismatches, conflicts, uncovered, secs);
    report(1, "rule-oracle equivalence", ok, detail);
}

// --- 2: resolver equals the linear-scan reference ---------------------------

void criterion_resolver_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(20150120);
    std::uniform_int_distribution<std::uint32_t> any32;
    std::uniform_int_distribution<int> len_dist(8, 28);

    testsupport::ReferenceResolver ref;
    std::vector<IxpRecord> ixps;
    std::vector<MembershipTriplet> triplets;
    std::vector<IxpPrefix> ixp_prefixes;
    std::vector<AsMapping> mappings;

    IxpRecord x;
    x.ixp_id = "pdb:1";
    x.display_name = "metro-ix";
    x.names = {"metroix"};
    x.sources = mask_of(Source::PDB);
    ixps.push_back(x);

    std::set<Prefix> used;
    while (used.size() < 10000) {
        int len = len_dist(rng);
        Prefix p{any32(rng) & prefix_mask(len), len};
        if (!used.insert(p).second) continue;
        if (used.size() % 10 == 0) {
            ixp_prefixes.push_back({p, "pdb:1", mask_of(Source::PDB)});
            ref.ixp_prefixes.push_back({p, "pdb:1"});
        } else {
            std::vector<Asn> asns{64500 + any32(rng) % 256};
            if (any32(rng) % 8 == 0) {
                asns.push_back(64500 + any32(rng) % 256);
                std::sort(asns.begin(), asns.end());
                asns.erase(std::unique(asns.begin(), asns.end()), asns.end());
            }
            mappings.push_back({p, asns});
            ref.as_prefixes.push_back({p, asns});
        }
    }
    for (int i = 0; i < 500; ++i) {
        IpV4 ip = any32(rng);
        if (is_reserved(ip) || ref.triplets.count(ip)) continue;
        Asn asn = 64500 + any32(rng) % 256;
        triplets.push_back({ip, "pdb:1", asn, mask_of(Source::PDB)});
        ref.triplets[ip] = {"pdb:1", asn};
    }

    MergedDataset d(std::move(ixps), std::move(triplets), std::move(ixp_prefixes), {},
                    std::move(mappings));
    std::vector<std::string> w;
    auto idx = build_index(d, w);

    std::vector<Prefix> all_prefixes(used.begin(), used.end());
    std::size_t mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        IpV4 ip;
        if (i % 2 == 0) {
            ip = any32(rng);  // uniform
        } else {  // biased inside a known prefix so deep matches get exercised
            const auto& p = all_prefixes[any32(rng) % all_prefixes.size()];
            ip = p.net | (any32(rng) & ~prefix_mask(p.len));
        }
        if (!(resolve_ip(idx, ip) == ref.resolve(ip))) ++mismatches;
    }
    double secs = seconds_since(t0);
    bool ok = mismatches == 0 && secs < 10.0;
    char detail[160];
    std::snprintf(detail, sizeof detail, "%zu prefixes, 10000 lookups, %zu mismatches, %.2fs",
                  used.size(), mismatches, secs);
    report(2, "resolver-oracle equivalence", ok, detail);
}

// --- 3: planted detections, perfect recall and no false positives -----------

void criterion_planted_corpus() {
    auto d = testsupport::make_dataset();
    std::vector<std::string> w;
    auto idx = build_index(d, w);

    struct PlantSpec {
        RuleId rule;
        LinkSide link;
        const char* hops[3];
    };
    const PlantSpec plants[] = {
        {RuleId::R1_1, LinkSide::A, {"23.0.0.7", "195.69.144.20", "31.0.0.5"}},
        {RuleId::R1_2, LinkSide::A, {"23.0.0.7", "195.69.144.20", "9.9.9.9"}},
        {RuleId::R1_3, LinkSide::AOrB, {"23.0.0.7", "195.69.144.20", "53.0.0.1"}},
        {RuleId::R1_4, LinkSide::A, {"23.0.0.7", "195.69.145.9", "41.0.0.1"}},
        {RuleId::R1_5, LinkSide::B, {"41.0.0.1", "195.69.145.9", "53.0.0.1"}},
        {RuleId::R1_6, LinkSide::B, {"41.0.0.1", "195.69.144.20", "31.0.0.5"}},
        {RuleId::R1_7, LinkSide::AOrB, {"41.0.0.1", "195.69.144.20", "9.9.9.9"}},
        {RuleId::R2_0, LinkSide::A, {"23.0.0.7", "195.69.144.10", "195.69.144.20"}},
    };

    std::mt19937 rng(1000);
    std::vector<TraceroutePath> paths;
    std::vector<Detection> truth;
    int next_filler = 0;
    auto filler = [&]() {
        ++next_filler;
        return "41." + std::to_string(next_filler / 250 % 250) + "." +
               std::to_string(next_filler % 250) + "." + std::to_string(next_filler / 62500 + 1);
    };

    for (int i = 0; i < 1000; ++i) {
        std::string id = "path" + std::to_string(i);
        TraceroutePath p;
        p.path_id = id;
        auto add = [&](const std::string& addr) {
            p.hops.push_back({static_cast<int>(p.hops.size()) + 1, *parse_ipv4(addr), 1.0});
        };
        if (i % 5 == 4) {  // clean path
            int n = 6 + static_cast<int>(rng() % 6);
            for (int h = 0; h < n; ++h) add(filler());
        } else {
            const auto& plant = plants[i % 8];
            int lead = 2 + static_cast<int>(rng() % 4);
            for (int h = 0; h < lead; ++h) add(filler());
            int start = static_cast<int>(p.hops.size()) + 1;
            for (const char* hop : plant.hops) add(hop);
            for (int h = 0; h < 3; ++h) add(filler());
            truth.push_back({id, start, plant.rule, testsupport::kMetroIx, plant.link,
                             strength_of(plant.rule)});
        }
        paths.push_back(std::move(p));
    }

    std::vector<Detection> found;
    for (const auto& p : paths) {
        auto kept = preprocess_path(p);
        if (!kept) continue;
        auto dets = detect_path(idx, d, *kept);
        found.insert(found.end(), dets.begin(), dets.end());
    }

    std::size_t matched = 0, extra = 0;
    std::multiset<std::string> want;
    auto key = [](const Detection& det) {
        return det.path_id + "|" + std::to_string(det.window_start) + "|" + rule_name(det.rule) +
               "|" + det.ixp_id + "|" + link_name(det.link);
    };
    for (const auto& det : truth) want.insert(key(det));
    for (const auto& det : found) {
        auto it = want.find(key(det));
        if (it != want.end()) {
            want.erase(it);
            ++matched;
        } else {
            ++extra;
        }
    }
    double recall = truth.empty() ? 0 : 100.0 * static_cast<double>(matched) / truth.size();
    bool ok = matched == truth.size() && extra == 0 && !truth.empty();
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "%zu paths, %zu planted, recall %.1f%%, %zu false positives", paths.size(),
                  truth.size(), recall, extra);
    report(3, "planted-detection recall/precision", ok, detail);
}

// --- 4: merge fixture matches the hand-executed expectation -----------------

const char* kMergePdb =
    "IXSNAP|PDB\n"
    "IXP|11|Alpha-IX|1\n"
    "PFX|11|195.69.144.0/22\n"
    "MEM|11|100|195.69.144.10\n"
    "MEM|11|300|195.69.144.30\n"
    "IXP|12|Beacon Exchange|1\n"
    "MEM|12|400|81.20.0.9\n"
    "IXP|13|Lonesome-IX|1\n"
    "PFX|13|62.40.0.0/16\n"
    "MEM|13|500|62.40.0.5\n"
    "IXP|14|Ghost-IX|1\n";

const char* kMergePch =
    "IXSNAP|PCH\n"
    "IXP|21|Alpha Internet Exchange|1\n"
    "PFX|21|195.69.144.0/22\n"
    "MEM|21|200|195.69.144.10\n"
    "IXP|22|beacon   EXCHANGE|1\n"
    "MEM|22|400|81.20.0.9\n"
    "IXP|23|Ghost-IX|0\n"
    "PFX|23|146.66.0.0/17\n"
    "MEM|23|600|146.66.0.77\n"
    "IXP|24|Solo-IX|1\n"
    "PFX|24|96.0.0.0/12\n";

// Worked out by hand from the records above: pdb:11/pch:21 unify on the
// shared prefix and lose the 195.69.144.10 triplet (AS100 vs AS200);
// pdb:12/pch:22 unify on the shared router entry; Ghost-IX is inactive in
// PCH and disappears entirely; the rest stay single-source.
const char* kMergeExpected =
    "IXDATA|1\n"
    "IXP|pch:24|Solo-IX|soloix|PCH\n"
    "IXP|pdb:11+pch:21|Alpha Internet Exchange|alpha internet exchange;alphaix|PDB,PCH\n"
    "IXP|pdb:12+pch:22|Beacon Exchange|beacon exchange|PDB,PCH\n"
    "IXP|pdb:13|Lonesome-IX|lonesomeix|PDB\n"
    "PFX|pch:24|96.0.0.0/12|PCH\n"
    "PFX|pdb:11+pch:21|195.69.144.0/22|PDB,PCH\n"
    "PFX|pdb:13|62.40.0.0/16|PDB\n"
    "MEM|pdb:11+pch:21|100|PDB\n"
    "MEM|pdb:11+pch:21|200|PCH\n"
    "MEM|pdb:11+pch:21|300|PDB\n"
    "MEM|pdb:12+pch:22|400|PDB,PCH\n"
    "MEM|pdb:13|500|PDB\n"
    "TRI|pdb:13|500|62.40.0.5|PDB\n"
    "TRI|pdb:12+pch:22|400|81.20.0.9|PDB,PCH\n"
    "TRI|pdb:11+pch:21|300|195.69.144.30|PDB\n";

std::string shuffle_records(const std::string& text, std::mt19937& rng) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    std::shuffle(lines.begin() + 1, lines.end(), rng);
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

void criterion_merge() {
    std::vector<std::string> w;
    auto merged = merge_datasets(parse_snapshot(kMergePdb, Source::PDB, w),
                                 parse_snapshot(kMergePch, Source::PCH, w), w);
    auto serialized = write_dataset(merged);
    bool exact = serialized == kMergeExpected;

    bool stable = true;
    std::mt19937 rng(4);
    for (int round = 0; round < 20 && stable; ++round) {
        std::vector<std::string> w2;
        auto again = merge_datasets(
            parse_snapshot(shuffle_records(kMergePdb, rng), Source::PDB, w2),
            parse_snapshot(shuffle_records(kMergePch, rng), Source::PCH, w2), w2);
        stable = write_dataset(again) == serialized;
    }
    report(4, "merge correctness", exact && stable,
           std::string("hand-executed expectation ") + (exact ? "matched" : "NOT matched") +
               ", permutation-stable: " + (stable ? "yes" : "no"));
}

// --- 5: stats arithmetic -----------------------------------------------------

void criterion_stats() {
    auto d = testsupport::make_dataset();
    std::vector<std::string> w;
    auto idx = build_index(d, w);

    std::vector<PathResult> corpus;
    {
        testsupport::PathBuilder b("p1");
        b.hop("41.0.0.1").hop("41.0.0.2").hop("41.0.1.1").hop("41.0.1.2")
            .hop("23.0.0.7").hop("195.69.144.20").hop("31.0.0.5").hop("31.0.0.99");
        PathResult r{b.path, {}};
        r.detections = detect_path(idx, d, r.path);
        corpus.push_back(std::move(r));
    }
    for (int i = 2; i <= 5; ++i) {
        testsupport::PathBuilder b("p" + std::to_string(i));
        for (int h = 0; h < 8; ++h)
            b.hop(("41." + std::to_string(i) + "." + std::to_string(h) + ".1").c_str());
        corpus.push_back({b.path, {}});
    }
    auto s = compute_stats(corpus, idx);
    bool stats_ok = s.pct_paths_with_ixp == 20.0 && s.avg_ixp_hop == 6.0 &&
                    s.avg_ixps_per_ixp_path == 1.0;

    std::mt19937 rng(77);
    const RuleId all[] = {RuleId::R1_1, RuleId::R1_2, RuleId::R1_3, RuleId::R1_4, RuleId::R1_5,
                          RuleId::R1_6, RuleId::R1_7, RuleId::R2_0, RuleId::OtherStrong,
                          RuleId::OtherWeak};
    bool rates_ok = true;
    for (int round = 0; round < 50 && rates_ok; ++round) {
        std::vector<PathResult> c(1);
        c[0].path = corpus[0].path;
        int n = 1 + static_cast<int>(rng() % 60);
        for (int i = 0; i < n; ++i)
            c[0].detections.push_back({"p", i, all[rng() % 10], testsupport::kMetroIx,
                                       LinkSide::A, Strength::Weak});
        double sum = 0;
        for (const auto& [rule, pct] : rule_hit_rates(c)) sum += pct;
        rates_ok = std::abs(sum - 100.0) <= 0.01;
    }

    auto r_up = pearson({{1, 1}, {2, 2}, {3, 3}});
    auto r_down = pearson({{1, 3}, {2, 2}, {3, 1}});
    bool pearson_ok = r_up && std::abs(*r_up - 1.0) < 1e-12 && r_down &&
                      std::abs(*r_down + 1.0) < 1e-12;

    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "pct=%.1f avg_ixp_hop=%.1f, hit-rate sums within 0.01: %s, pearson %+.1f/%+.1f",
                  s.pct_paths_with_ixp, s.avg_ixp_hop, rates_ok ? "yes" : "no",
                  r_up ? *r_up : 0.0, r_down ? *r_down : 0.0);
    report(5, "stats arithmetic", stats_ok && rates_ok && pearson_ok, detail);
}

// --- 6: consistency checker --------------------------------------------------

void criterion_consistency() {
    IxpRecord x;
    x.ixp_id = "pdb:1";
    x.display_name = "metro-ix";
    x.names = {"metroix"};
    x.sources = mask_of(Source::PDB);
    std::vector<MembershipTriplet> triplets;
    for (Asn asn = 64501; asn <= 64510; ++asn)
        triplets.push_back({*parse_ipv4("23.0.0." + std::to_string(asn - 64500)), "pdb:1", asn,
                            mask_of(Source::PDB)});
    MergedDataset d({x}, std::move(triplets), {}, {}, {});

    std::vector<BgpTuple> bgp;
    for (Asn asn = 64501; asn <= 64510; ++asn)
        bgp.push_back({"pdb:1", asn, *parse_ipv4("23.0.0." + std::to_string(asn - 64500))});
    bgp[3].ip = *parse_ipv4("23.0.0.77");  // one stale address

    auto reports = consistency_check(d, bgp);
    const auto& pdb = reports[Source::PDB];
    bool ok = pdb.common_tuples == 10 && pdb.pct_consistent && *pdb.pct_consistent == 90.0;
    char detail[120];
    std::snprintf(detail, sizeof detail, "10 common tuples, 9 consistent -> %.1f%%",
                  pdb.pct_consistent ? *pdb.pct_consistent : -1.0);
    report(6, "consistency checker", ok, detail);
}

// --- 7: end-to-end golden through the CLI ------------------------------------

void criterion_golden() {
    std::string cmd = kBin + " --data-dir " + kTestData + "/cli_data trace 31.0.0.99 --program " +
                      kTestData + "/fake_traceroute 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        report(7, "end-to-end golden", false, "could not launch the CLI");
        return;
    }
    std::string output;
    char buf[4096];
    std::size_t got;
    while ((got = ::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
    int status = ::pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

    std::string golden = read_file(kTestData + "/annotated_r11.golden");
    bool ok = code == 0 && output == golden;
    // the annotation must sit between the rendered hops 5 and 6
    auto det = output.find("=== IXP metro-ix crossed");
    auto hop5 = output.find("\n 5  ");
    auto hop6 = output.find("\n 6  ");
    ok = ok && det != std::string::npos && hop5 < det && det < hop6;
    char detail[120];
    std::snprintf(detail, sizeof detail, "exit %d, %s golden (%zu bytes)", code,
                  output == golden ? "byte-identical to" : "DIFFERS from", output.size());
    report(7, "end-to-end golden", ok, detail);
}

// --- 8: dataset summary over operator-supplied registry exports --------------

void criterion_summary_smoke() {
    const char* dir = std::getenv("IXTRACE_REAL_DATA_DIR");
    if (!dir || !*dir) {
        report(8, "dataset summary smoke", true,
               "skipped: no operator-supplied exports (set IXTRACE_REAL_DATA_DIR to run)");
        return;
    }
    try {
        std::vector<std::string> w;
        auto pdb = parse_snapshot(read_file(std::string(dir) + "/pdb.snapshot"), Source::PDB, w);
        auto pch = parse_snapshot(read_file(std::string(dir) + "/pch.snapshot"), Source::PCH, w);
        auto merged = merge_datasets(pdb, pch, w);
        auto s = dataset_summary(merged);
        bool ok = s.triplets > 0 && s.prefixes > 0 && s.ixps > 0;
        char detail[200];
        std::snprintf(detail, sizeof detail,
                      "ixps=%zu prefixes=%zu triplets=%zu with-members=%zu with-prefixes=%zu",
                      s.ixps, s.prefixes, s.triplets, s.ixps_with_membership_data,
                      s.ixps_with_prefix_data);
        report(8, "dataset summary smoke", ok, detail);
    } catch (const std::exception& e) {
        report(8, "dataset summary smoke", false, e.what());
    }
}

}  // namespace

int main() {
    criterion_rule_oracle();
    criterion_resolver_oracle();
    criterion_planted_corpus();
    criterion_merge();
    criterion_stats();
    criterion_consistency();
    criterion_golden();
    criterion_summary_smoke();
    std::printf("ACCEPTANCE: %d/8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
