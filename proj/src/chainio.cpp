#include "serorec/chainio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "serorec/errors.hpp"

namespace serorec {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "serorec-chains/1";

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json config_to_json(const SamplerConfig& cfg) {
  json j;
  j["nChains"] = cfg.n_chains;
  j["iterations"] = cfg.iterations;
  j["burnIn"] = cfg.burn_in;
  j["thinning"] = cfg.thinning;
  j["adaptWindow"] = cfg.adapt_window;
  j["targetAcceptScalar"] = cfg.target_accept_scalar;
  j["targetAcceptVector"] = cfg.target_accept_vector;
  j["tauStep0"] = cfg.tau_step0;
  j["betaStep0"] = cfg.beta_step0;
  j["seed"] = cfg.seed;
  return j;
}

SamplerConfig config_from_json(const json& j) {
  SamplerConfig cfg;
  cfg.n_chains = j.at("nChains").get<int>();
  cfg.iterations = j.at("iterations").get<long>();
  cfg.burn_in = j.at("burnIn").get<long>();
  cfg.thinning = j.at("thinning").get<long>();
  cfg.adapt_window = j.at("adaptWindow").get<long>();
  cfg.target_accept_scalar = j.at("targetAcceptScalar").get<double>();
  cfg.target_accept_vector = j.at("targetAcceptVector").get<double>();
  cfg.tau_step0 = j.at("tauStep0").get<double>();
  cfg.beta_step0 = j.at("betaStep0").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

std::filesystem::path write_chain_output(const ChainOutput& output,
                                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["schema"] = kSchema;
  manifest["paramNames"] = output.param_names;
  manifest["config"] = config_to_json(output.config);
  manifest["wallSeconds"] = output.wall_seconds;
  manifest["chains"] = json::array();

  for (std::size_t c = 0; c < output.chains.size(); ++c) {
    const ChainRun& run = output.chains[c];
    const std::string fname = "chain_" + std::to_string(c) + ".csv";
    json jc;
    jc["file"] = fname;
    jc["seed"] = run.seed;
    jc["acceptTau"] = run.accept_tau;
    jc["acceptBeta"] = run.accept_beta;
    jc["failed"] = run.failed;
    jc["error"] = run.error;
    manifest["chains"].push_back(jc);
    if (run.failed) continue;

    std::ofstream out(dir / fname);
    if (!out) throw ParseError("cannot open for writing: " + (dir / fname).string());
    for (std::size_t j = 0; j < output.param_names.size(); ++j)
      out << (j ? "," : "") << output.param_names[j];
    out << '\n';
    for (Eigen::Index i = 0; i < run.draws.rows(); ++i) {
      for (Eigen::Index j = 0; j < run.draws.cols(); ++j)
        out << (j ? "," : "") << g17(run.draws(i, j));
      out << '\n';
    }
    if (!out) throw ParseError("write failed: " + (dir / fname).string());
  }

  const std::filesystem::path mpath = dir / "manifest.json";
  std::ofstream mout(mpath);
  if (!mout) throw ParseError("cannot open for writing: " + mpath.string());
  mout << manifest.dump(2) << '\n';
  return mpath;
}

ChainOutput read_chain_output(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open: " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }

  ChainOutput out;
  try {
    if (manifest.at("schema").get<std::string>() != kSchema)
      throw ParseError(manifest_path.string() + ": unsupported schema");
    out.param_names = manifest.at("paramNames").get<std::vector<std::string>>();
    out.config = config_from_json(manifest.at("config"));
    out.wall_seconds = manifest.value("wallSeconds", 0.0);

    const std::filesystem::path dir = manifest_path.parent_path();
    for (const auto& jc : manifest.at("chains")) {
      ChainRun run;
      run.seed = jc.at("seed").get<std::uint64_t>();
      run.accept_tau = jc.at("acceptTau").get<double>();
      run.accept_beta = jc.at("acceptBeta").get<double>();
      run.failed = jc.at("failed").get<bool>();
      run.error = jc.at("error").get<std::string>();
      if (!run.failed) {
        const std::filesystem::path cpath = dir / jc.at("file").get<std::string>();
        std::ifstream cin(cpath);
        if (!cin) throw ParseError("cannot open: " + cpath.string());
        std::string line;
        if (!std::getline(cin, line)) throw ParseError(cpath.string() + ": empty chain file");
        std::vector<std::vector<double>> rows;
        std::size_t line_no = 1;
        while (std::getline(cin, line)) {
          ++line_no;
          if (line.empty()) continue;
          std::vector<double> row;
          row.reserve(out.param_names.size());
          std::istringstream ss(line);
          std::string field;
          while (std::getline(ss, field, ',')) {
            try {
              row.push_back(std::stod(field));
            } catch (const std::exception&) {
              throw ParseError(cpath.string() + ": line " + std::to_string(line_no) +
                               ": bad numeric field '" + field + "'");
            }
          }
          if (row.size() != out.param_names.size())
            throw ParseError(cpath.string() + ": line " + std::to_string(line_no) +
                             ": expected " + std::to_string(out.param_names.size()) + " fields");
          rows.push_back(std::move(row));
        }
        run.draws.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(out.param_names.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
          for (std::size_t j = 0; j < rows[i].size(); ++j)
            run.draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
      out.chains.push_back(std::move(run));
    }
  } catch (const json::exception& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace serorec
