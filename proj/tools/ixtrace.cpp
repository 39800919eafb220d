// ixtrace: traceroute with IXP crossing detection.
//
// Subcommands: trace (probe one target), batch (annotate a path file),
// stats (corpus statistics), update (fetch registry data and rebuild the
// dataset), validate (compare triplets against BGP collector tuples).
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 external-program or
// network error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ixtrace/analytics.hpp"
#include "ixtrace/annotate.hpp"
#include "ixtrace/engine.hpp"
#include "ixtrace/fetch.hpp"
#include "ixtrace/jsonout.hpp"
#include "ixtrace/merge.hpp"
#include "ixtrace/resolver.hpp"
#include "ixtrace/snapshot.hpp"
#include "ixtrace/trace.hpp"

namespace fs = std::filesystem;
using namespace ixtrace;

namespace {

struct GlobalOpts {
    std::string data_dir;
    std::string out;
    bool json = false;
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << content;
}

void emit(const GlobalOpts& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
    } else {
        spill(g.out, text);
    }
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct LoadedData {
    MergedDataset dataset;
    PrefixIndex index;
};

LoadedData load_dataset(const GlobalOpts& g) {
    fs::path dir = g.data_dir;
    for (const char* name : {"pdb.snapshot", "pch.snapshot", "asmap.txt"})
        if (!fs::exists(dir / name))
            throw DataError("missing dataset file " + (dir / name).string() +
                            " (run 'ixtrace update' or point --data-dir at your data)");
    std::vector<std::string> warnings;
    auto pdb = parse_snapshot(slurp(dir / "pdb.snapshot"), Source::PDB, warnings);
    auto pch = parse_snapshot(slurp(dir / "pch.snapshot"), Source::PCH, warnings);
    auto merged = merge_datasets(pdb, pch, warnings);
    auto mappings = load_as_mappings(slurp(dir / "asmap.txt"), warnings);
    LoadedData data{with_as_mappings(merged, std::move(mappings)), {}};
    data.index = build_index(data.dataset, warnings);
    print_warnings(warnings);
    return data;
}

// Detection over many paths; the engine is pure, so paths fan out across a
// few workers while the output keeps input order.
std::vector<PathResult> detect_all(const LoadedData& data, std::vector<TraceroutePath> paths) {
    std::vector<PathResult> results(paths.size());
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futs;
    std::size_t chunk = (paths.size() + workers - 1) / std::max<std::size_t>(1, workers);
    for (unsigned wi = 0; wi < workers; ++wi) {
        std::size_t lo = wi * chunk, hi = std::min(paths.size(), lo + chunk);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, [&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) {
                results[i].detections = detect_path(data.index, data.dataset, paths[i]);
                results[i].path = std::move(paths[i]);
            }
        }));
    }
    for (auto& f : futs) f.get();
    return results;
}

std::string format_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string stats_report(const CorpusStats& s, const std::map<RuleId, double>& rates,
                         const std::vector<RankedIxp>& ranking, const MergedDataset& d,
                         const std::optional<double>& correlation) {
    std::ostringstream out;
    out << "paths: " << s.paths << "\n";
    out << "paths_with_ixp_pct: " << format_pct(s.pct_paths_with_ixp) << "\n";
    out << "avg_ixps_per_ixp_path: " << format_pct(s.avg_ixps_per_ixp_path) << "\n";
    out << "avg_hops_per_path: " << format_pct(s.avg_hops_per_path) << "\n";
    out << "avg_ixp_hop: " << format_pct(s.avg_ixp_hop) << "\n";
    out << "avg_ases_per_path: " << format_pct(s.avg_ases_per_path) << "\n";
    out << "rule_hit_rates:\n";
    if (rates.empty()) out << "  (no detections)\n";
    for (const auto& [rule, pct] : rates) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", pct);
        out << "  " << rule_name(rule) << ": " << buf << "\n";
    }
    out << "top_ixps:\n";
    int rank = 0;
    for (const auto& r : ranking) {
        const auto* rec = d.find_ixp(r.ixp_id);
        out << "  " << ++rank << ". " << (rec ? rec->display_name : r.ixp_id) << " (" << r.ixp_id
            << ")  paths=" << r.path_count << "  members=" << r.member_count << "\n";
        if (rank == 10) break;
    }
    out << "members_paths_correlation: ";
    if (correlation) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *correlation);
        out << buf << "\n";
    } else {
        out << "undefined\n";
    }
    return out.str();
}

int cmd_trace(const GlobalOpts& g, const std::string& target, const ProbeConfig& cfg) {
    auto data = load_dataset(g);
    std::vector<std::string> warnings;
    auto path = run_trace(target, cfg, warnings);
    print_warnings(warnings);

    auto kept = preprocess_path(path);
    std::vector<Detection> dets;
    if (kept) dets = detect_path(data.index, data.dataset, *kept);
    else std::cerr << "note: path excluded from detection (no replies or a loop)\n";

    if (g.json) emit(g, path_to_json(data.dataset, data.index, path, dets).dump() + "\n");
    else emit(g, annotate_path(data.dataset, data.index, path, dets));
    return 0;
}

int cmd_batch(const GlobalOpts& g, const std::string& pathfile) {
    auto data = load_dataset(g);
    std::vector<std::string> warnings;
    auto raw = parse_trace_file(slurp(pathfile), warnings);
    print_warnings(warnings);

    std::vector<TraceroutePath> paths;
    for (auto& p : raw) {
        if (auto kept = preprocess_path(p)) paths.push_back(std::move(*kept));
        else std::cerr << "note: path " << p.path_id << " excluded (no replies or a loop)\n";
    }

    auto results = detect_all(data, std::move(paths));
    std::ostringstream out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (g.json) {
            out << path_to_json(data.dataset, data.index, results[i].path, results[i].detections)
                       .dump()
                << "\n";
        } else {
            if (i) out << "\n";
            out << annotate_path(data.dataset, data.index, results[i].path,
                                 results[i].detections);
        }
    }
    emit(g, out.str());
    return 0;
}

int cmd_stats(const GlobalOpts& g, const std::string& pathfile, const std::string& csv_file) {
    auto data = load_dataset(g);
    std::vector<std::string> warnings;
    auto raw = parse_trace_file(slurp(pathfile), warnings);
    print_warnings(warnings);

    std::vector<TraceroutePath> paths;
    for (auto& p : raw)
        if (auto kept = preprocess_path(p)) paths.push_back(std::move(*kept));
    if (paths.empty()) throw DataError("no usable paths in " + pathfile);

    auto results = detect_all(data, std::move(paths));
    auto stats = compute_stats(results, data.index);
    std::map<RuleId, double> rates;
    bool any = false;
    for (const auto& r : results) any = any || !r.detections.empty();
    if (any) rates = rule_hit_rates(results);
    auto ranking = rank_ixps(data.dataset, results);
    auto exported = members_paths_export(ranking);
    if (!csv_file.empty()) spill(csv_file, exported.csv);

    if (g.json) {
        nlohmann::json obj;
        obj["paths"] = stats.paths;
        obj["paths_with_ixp_pct"] = stats.pct_paths_with_ixp;
        obj["avg_ixps_per_ixp_path"] = stats.avg_ixps_per_ixp_path;
        obj["avg_hops_per_path"] = stats.avg_hops_per_path;
        obj["avg_ixp_hop"] = stats.avg_ixp_hop;
        obj["avg_ases_per_path"] = stats.avg_ases_per_path;
        nlohmann::json jr = nlohmann::json::object();
        for (const auto& [rule, pct] : rates) jr[rule_name(rule)] = pct;
        obj["rule_hit_rates"] = jr;
        nlohmann::json jt = nlohmann::json::array();
        for (const auto& r : ranking)
            jt.push_back({{"ixp_id", r.ixp_id},
                          {"paths", r.path_count},
                          {"members", r.member_count}});
        obj["top_ixps"] = jt;
        if (exported.correlation) obj["members_paths_correlation"] = *exported.correlation;
        else obj["members_paths_correlation"] = nullptr;
        emit(g, obj.dump(2) + "\n");
    } else {
        emit(g, stats_report(stats, rates, ranking, data.dataset, exported.correlation));
    }
    return 0;
}

int cmd_update(const GlobalOpts& g, const std::string& pdb_url, const std::string& pch_url,
               int retries) {
    fs::path dir = g.data_dir;
    fs::create_directories(dir);

    std::vector<std::string> pdb_warnings, pch_warnings;
    auto pdb_fut = std::async(std::launch::async, [&] {
        return fetch_registry(Source::PDB, {pdb_url, retries, 20}, pdb_warnings);
    });
    auto pch_fut = std::async(std::launch::async, [&] {
        return fetch_registry(Source::PCH, {pch_url, retries, 20}, pch_warnings);
    });
    auto pdb = pdb_fut.get();
    auto pch = pch_fut.get();
    print_warnings(pdb_warnings);
    print_warnings(pch_warnings);

    spill(dir / "pdb.snapshot", write_snapshot(pdb));
    spill(dir / "pch.snapshot", write_snapshot(pch));

    std::vector<std::string> warnings;
    auto merged = merge_datasets(pdb, pch, warnings);
    print_warnings(warnings);
    spill(dir / "merged.dataset", write_dataset(merged));

    auto s = dataset_summary(merged);
    std::ostringstream out;
    out << "wrote " << (dir / "pdb.snapshot").string() << " (" << pdb.ixps.size() << " ixps)\n";
    out << "wrote " << (dir / "pch.snapshot").string() << " (" << pch.ixps.size() << " ixps)\n";
    out << "wrote " << (dir / "merged.dataset").string() << "\n";
    out << "ixps: " << s.ixps << "\n";
    out << "prefixes: " << s.prefixes << "\n";
    out << "triplets: " << s.triplets << "\n";
    out << "ixps_with_membership_data: " << s.ixps_with_membership_data << "\n";
    out << "ixps_with_prefix_data: " << s.ixps_with_prefix_data << "\n";
    emit(g, out.str());
    return 0;
}

int cmd_validate(const GlobalOpts& g, const std::string& bgpfile) {
    auto data = load_dataset(g);
    std::vector<std::string> warnings;
    auto tuples = parse_bgp_tuples(slurp(bgpfile), data.dataset, warnings);
    print_warnings(warnings);
    auto reports = consistency_check(data.dataset, tuples);

    if (g.json) {
        nlohmann::json obj;
        for (const auto& [source, rep] : reports) {
            nlohmann::json r;
            r["common_tuples"] = rep.common_tuples;
            if (rep.pct_consistent) r["pct_consistent"] = *rep.pct_consistent;
            else r["pct_consistent"] = nullptr;
            obj[source_name(source)] = r;
        }
        emit(g, obj.dump(2) + "\n");
    } else {
        std::ostringstream out;
        for (const auto& [source, rep] : reports) {
            out << source_name(source) << ": common_tuples=" << rep.common_tuples
                << " consistent=";
            if (rep.pct_consistent) out << format_pct(*rep.pct_consistent) << "%";
            else out << "n/a";
            out << "\n";
        }
        emit(g, out.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"traceroute with IXP crossing detection"};
    app.require_subcommand(1);

    GlobalOpts g;
    g.data_dir = env_or("IXTRACE_DATA_DIR", "data");
    app.add_option("--data-dir", g.data_dir, "directory with pdb.snapshot, pch.snapshot, asmap.txt");
    app.add_option("--out", g.out, "write output to a file instead of stdout");
    app.add_flag("--json", g.json, "machine-readable output");

    auto* trace = app.add_subcommand("trace", "probe a target and annotate the path");
    std::string target;
    ProbeConfig probe;
    std::string probe_method = "icmp", backend = "traceroute";
    trace->add_option("target", target, "hostname or IPv4 address")->required();
    trace->add_option("--probe", probe_method, "probe method: icmp or udp")
        ->check(CLI::IsMember({"icmp", "udp"}));
    trace->add_option("--max-ttl", probe.max_ttl, "maximum TTL to probe");
    trace->add_option("--backend", backend, "probing tool: traceroute or scamper")
        ->check(CLI::IsMember({"traceroute", "scamper"}));
    trace->add_option("--program", probe.program, "override the probing binary");

    auto* batch = app.add_subcommand("batch", "annotate every path in a path file");
    std::string batch_file;
    batch->add_option("pathfile", batch_file, "PATH|/HOP| file")->required();

    auto* stats = app.add_subcommand("stats", "corpus statistics for a path file");
    std::string stats_file, csv_file;
    stats->add_option("pathfile", stats_file, "PATH|/HOP| file")->required();
    stats->add_option("--csv", csv_file, "write the members/paths table as CSV");

    auto* update = app.add_subcommand("update", "fetch registry data and rebuild the dataset");
    std::string pdb_url = env_or("IXTRACE_PDB_URL", "https://www.peeringdb.com");
    std::string pch_url = env_or("IXTRACE_PCH_URL", "https://www.pch.net");
    int retries = 3;
    update->add_option("--pdb-url", pdb_url, "PDB-style endpoint base URL");
    update->add_option("--pch-url", pch_url, "PCH-style endpoint base URL");
    update->add_option("--retries", retries, "attempts per request");

    auto* validate = app.add_subcommand("validate", "check triplets against BGP tuples");
    std::string bgpfile;
    validate->add_option("bgpfile", bgpfile, "BGP|ixp|asn|ip file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        probe.method = probe_method == "udp" ? ProbeMethod::Udp : ProbeMethod::Icmp;
        probe.backend = backend == "scamper" ? ProbeBackend::Scamper : ProbeBackend::Traceroute;
        if (trace->parsed()) return cmd_trace(g, target, probe);
        if (batch->parsed()) return cmd_batch(g, batch_file);
        if (stats->parsed()) return cmd_stats(g, stats_file, csv_file);
        if (update->parsed()) return cmd_update(g, pdb_url, pch_url, retries);
        if (validate->parsed()) return cmd_validate(g, bgpfile);
    } catch (const ExternalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
