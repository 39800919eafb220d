#pragma once

// Shared test dataset: two IXPs with members and prefixes plus an origin-AS
// table, and helpers for assembling synthetic paths hop by hop.

#include <string>
#include <vector>

#include "ixtrace/merge.hpp"
#include "ixtrace/model.hpp"
#include "ixtrace/resolver.hpp"

namespace testsupport {

using namespace ixtrace;

// metro-ix (pdb:1):  prefix 195.69.144.0/22
//   AS65001 router 195.69.144.10, AS65002 router 195.69.144.20,
//   AS65006 router 195.69.144.60, AS65010 member without router address
// harbor-ix (pch:2): prefix 81.20.0.0/20, AS65003 router 81.20.0.9
// origin table: 23/8->65001, 31/8->65002, 37/8->65003, 41/8->65004,
//               45/8->{65001,65005}, 53/8->65006, 59/8->65010
inline MergedDataset make_dataset() {
    std::vector<std::string> warnings;
    auto pdb = parse_snapshot(
        "IXSNAP|PDB\n"
        "IXP|1|metro-ix|1\n"
        "PFX|1|195.69.144.0/22\n"
        "MEM|1|65001|195.69.144.10\n"
        "MEM|1|65002|195.69.144.20\n"
        "MEM|1|65006|195.69.144.60\n"
        "MEM|1|65010\n",
        Source::PDB, warnings);
    auto pch = parse_snapshot(
        "IXSNAP|PCH\n"
        "IXP|2|harbor-ix|1\n"
        "PFX|2|81.20.0.0/20\n"
        "MEM|2|65003|81.20.0.9\n",
        Source::PCH, warnings);
    auto merged = merge_datasets(pdb, pch, warnings);
    auto mappings = load_as_mappings(
        "23.0.0.0/8|65001\n"
        "31.0.0.0/8|65002\n"
        "37.0.0.0/8|65003\n"
        "41.0.0.0/8|65004\n"
        "45.0.0.0/8|65001,65005\n"
        "53.0.0.0/8|65006\n"
        "59.0.0.0/8|65010\n",
        warnings);
    return with_as_mappings(merged, std::move(mappings));
}

inline const char* kMetroIx = "pdb:1";
inline const char* kHarborIx = "pch:2";

struct PathBuilder {
    TraceroutePath path;

    explicit PathBuilder(std::string id, std::string target = "") {
        path.path_id = std::move(id);
        path.target = std::move(target);
    }
    PathBuilder& hop(const char* addr, double rtt = 1.0) {
        path.hops.push_back({static_cast<int>(path.hops.size()) + 1, *parse_ipv4(addr), rtt});
        return *this;
    }
    PathBuilder& gap() {
        path.hops.push_back({static_cast<int>(path.hops.size()) + 1, std::nullopt, std::nullopt});
        return *this;
    }
};

}  // namespace testsupport
