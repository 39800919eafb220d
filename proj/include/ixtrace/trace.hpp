#pragma once

// Probe execution and path input. Probing shells out to the system
// traceroute (or scamper) and parses its text output; replayed corpora come
// from path files:
//
//   PATH|id|target
//   HOP|index|ip-or-*|rtt_ms      (rtt may be empty for no-reply hops)

#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <sys/wait.h>
#include <vector>

#include "ixtrace/model.hpp"

namespace ixtrace {

enum class ProbeBackend { Traceroute, Scamper };
enum class ProbeMethod { Icmp, Udp };

struct ProbeConfig {
    ProbeBackend backend = ProbeBackend::Traceroute;
    ProbeMethod method = ProbeMethod::Icmp;
    int max_ttl = 0;       // 0 = program default
    std::string program;   // override binary; empty = backend default
};

namespace detail {

inline bool safe_target(std::string_view t) {
    if (t.empty() || t.size() > 253) return false;
    for (char c : t) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '.' || c == '-' || c == '_' || c == ':';
        if (!ok) return false;
    }
    return true;
}

inline std::optional<double> parse_rtt_ms(std::string_view rest) {
    // first "<number> ms" occurrence
    std::size_t i = 0;
    while (i < rest.size()) {
        if (rest[i] >= '0' && rest[i] <= '9') {
            std::size_t j = i;
            while (j < rest.size() && ((rest[j] >= '0' && rest[j] <= '9') || rest[j] == '.')) ++j;
            std::size_t k = j;
            while (k < rest.size() && rest[k] == ' ') ++k;
            if (rest.substr(k, 2) == "ms") {
                try {
                    return std::stod(std::string(rest.substr(i, j - i)));
                } catch (...) {
                    return std::nullopt;
                }
            }
            i = j;
        }
        ++i;
    }
    return std::nullopt;
}

}  // namespace detail

// Parses traceroute/scamper text output: hop lines start with the TTL, then
// either '*' or the replying address and an RTT. Header and continuation
// lines are ignored; gaps in the TTL sequence become no-reply hops.
inline TraceroutePath parse_traceroute_text(std::string_view text,
                                            std::vector<std::string>& warnings) {
    TraceroutePath path;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        std::size_t i = 0;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size() || line[i] < '0' || line[i] > '9') continue;  // not a hop line
        int ttl = 0;
        while (i < line.size() && line[i] >= '0' && line[i] <= '9') ttl = ttl * 10 + (line[i++] - '0');
        if (i < line.size() && line[i] != ' ' && line[i] != '\t') continue;  // e.g. an address
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::string_view rest = line.substr(i);

        if (ttl <= static_cast<int>(path.hops.size()) || ttl > 512) {
            warnings.push_back("trace line " + std::to_string(lineno) + ": hop index " +
                               std::to_string(ttl) + " out of order, line ignored");
            continue;
        }
        while (static_cast<int>(path.hops.size()) < ttl - 1) {
            int idx = static_cast<int>(path.hops.size()) + 1;
            path.hops.push_back({idx, std::nullopt, std::nullopt});
        }

        Hop hop{ttl, std::nullopt, std::nullopt};
        if (!rest.empty() && rest.front() != '*') {
            auto sp = rest.find(' ');
            auto addr_tok = rest.substr(0, sp == std::string_view::npos ? rest.size() : sp);
            auto addr = parse_ipv4(addr_tok);
            if (addr) {
                hop.address = addr;
                hop.rtt_ms = detail::parse_rtt_ms(rest.substr(addr_tok.size()));
            } else {
                warnings.push_back("trace line " + std::to_string(lineno) +
                                   ": unparseable hop, treated as no reply");
            }
        }
        path.hops.push_back(hop);
    }
    return path;
}

inline std::string probe_command(const ProbeConfig& cfg, const std::string& target) {
    std::string prog = cfg.program;
    if (prog.empty()) prog = cfg.backend == ProbeBackend::Scamper ? "scamper" : "traceroute";
    std::string cmd;
    if (cfg.backend == ProbeBackend::Scamper) {
        std::string trace = "trace -P " +
                            std::string(cfg.method == ProbeMethod::Icmp ? "icmp-paris" : "udp-paris");
        if (cfg.max_ttl > 0) trace += " -m " + std::to_string(cfg.max_ttl);
        cmd = prog + " -c \"" + trace + "\" -i " + target;
    } else {
        cmd = prog + " -n -q 1";
        if (cfg.method == ProbeMethod::Icmp) cmd += " -I";
        if (cfg.max_ttl > 0) cmd += " -m " + std::to_string(cfg.max_ttl);
        cmd += " " + target;
    }
    return cmd + " 2>/dev/null";
}

inline TraceroutePath run_trace(const std::string& target, const ProbeConfig& cfg,
                                std::vector<std::string>& warnings) {
    if (!detail::safe_target(target)) throw DataError("invalid target '" + target + "'");
    std::string cmd = probe_command(cfg, target);
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw ExternalError("failed to launch probe command");
    std::string output;
    char buf[4096];
    std::size_t got;
    while ((got = ::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
    int status = ::pclose(pipe);
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
        throw ExternalError("probe program not found; install traceroute/scamper or pass --program");
    if (!WIFEXITED(status) || (WEXITSTATUS(status) != 0 && output.empty()))
        throw ExternalError("probe program failed (exit status " +
                            std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) + ")");
    TraceroutePath path = parse_traceroute_text(output, warnings);
    path.path_id = target;
    path.target = target;
    return path;
}

// Reads a path file; malformed paths are skipped whole, with one warning
// naming the offending line.
inline std::vector<TraceroutePath> parse_trace_file(std::string_view text,
                                                    std::vector<std::string>& warnings) {
    std::vector<TraceroutePath> out;
    std::optional<TraceroutePath> cur;
    bool cur_bad = false;

    auto flush = [&]() {
        if (cur && !cur_bad && !cur->hops.empty()) out.push_back(std::move(*cur));
        cur.reset();
        cur_bad = false;
    };

    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        auto bad = [&](const std::string& msg) {
            if (!cur_bad)
                warnings.push_back("path file line " + std::to_string(lineno) + ": " + msg +
                                   ", path skipped");
            cur_bad = true;
        };
        auto fields = detail::split_fields(line);
        if (fields[0] == "PATH") {
            flush();
            if (fields.size() != 3) {
                warnings.push_back("path file line " + std::to_string(lineno) +
                                   ": PATH record needs 3 fields, path skipped");
                cur = TraceroutePath{};
                cur_bad = true;
                continue;
            }
            cur = TraceroutePath{std::string(fields[1]), std::string(fields[2]), {}};
        } else if (fields[0] == "HOP") {
            if (!cur) {
                warnings.push_back("path file line " + std::to_string(lineno) +
                                   ": HOP before any PATH, line ignored");
                continue;
            }
            if (cur_bad) continue;
            if (fields.size() != 4) { bad("HOP record needs 4 fields"); continue; }
            int idx = 0;
            bool idx_ok = !fields[1].empty() && fields[1].size() <= 4;
            for (char c : fields[1]) {
                if (c < '0' || c > '9') { idx_ok = false; break; }
                idx = idx * 10 + (c - '0');
            }
            if (!idx_ok || idx != static_cast<int>(cur->hops.size()) + 1) {
                bad("hop index must increase from 1 without gaps");
                continue;
            }
            Hop hop{idx, std::nullopt, std::nullopt};
            if (fields[2] != "*") {
                auto addr = parse_ipv4(fields[2]);
                if (!addr) { bad("bad hop address '" + std::string(fields[2]) + "'"); continue; }
                hop.address = addr;
            }
            if (!fields[3].empty()) {
                try {
                    std::size_t used = 0;
                    double v = std::stod(std::string(fields[3]), &used);
                    if (used != fields[3].size() || v < 0) { bad("bad rtt"); continue; }
                    hop.rtt_ms = v;
                } catch (...) {
                    bad("bad rtt");
                    continue;
                }
            }
            cur->hops.push_back(hop);
        } else {
            bad("unknown record type '" + std::string(fields[0]) + "'");
        }
    }
    flush();
    return out;
}

}  // namespace ixtrace
