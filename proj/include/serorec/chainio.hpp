#ifndef SEROREC_CHAINIO_HPP
#define SEROREC_CHAINIO_HPP

#include <filesystem>

#include "serorec/mcmc.hpp"

namespace serorec {

// One CSV per chain (header = canonical parameter order, full decimal
// precision) plus manifest.json with config, per-chain seeds, acceptance
// rates, and failure records. Returns the manifest path.
std::filesystem::path write_chain_output(const ChainOutput& output,
                                         const std::filesystem::path& dir);

// Inverse of write_chain_output (wall-clock metadata is not round-tripped).
ChainOutput read_chain_output(const std::filesystem::path& manifest_path);

}  // namespace serorec

#endif
