#pragma once

#include <string>
#include <utility>

#include "edgelab/chain.hpp"

namespace edgelab {

struct ChainFile {
    ChainSpec chain;
    AdditiveFunctional f;
    std::string provenance;  // raw JSON of the generator block, may be empty
};

/// Chain-spec JSON:
/// {"version":1, "sizes":[...], "kernels":[[row-major]...],
///  "reference":[[...]...]|null, "mu1":[...], "f":[[row-major]...],
///  "lattice":{"L":int}|null, "eps0":real, "labels":{...}}
/// In lattice mode the f entries are {"num":int,"den":int} objects.
ChainFile load_chain_json(const std::string& path);
void save_chain_json(const std::string& path, const ChainSpec& chain,
                     const AdditiveFunctional& f,
                     const std::string& provenance = "");

std::string chain_to_json(const ChainSpec& chain, const AdditiveFunctional& f,
                          const std::string& provenance = "");
ChainFile chain_from_json(const std::string& text);

}  // namespace edgelab
