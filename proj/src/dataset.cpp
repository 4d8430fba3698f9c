#include "serorec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "serorec/errors.hpp"

namespace serorec {

std::string role_name(Role r) { return r == Role::InSample ? "in" : "out"; }

Role role_from_name(const std::string& s) {
  if (s == "in") return Role::InSample;
  if (s == "out") return Role::OutOfSample;
  throw ParseError("unknown role '" + s + "' (expected 'in' or 'out')");
}

void Individual::validate(std::size_t n_biomarkers) const {
  if (y.size() != n_biomarkers)
    throw std::invalid_argument("individual " + std::to_string(id) +
                                ": response series count does not match biomarker count");
  for (const auto& series : y)
    if (series.size() != times.size())
      throw std::invalid_argument("individual " + std::to_string(id) +
                                  ": response length does not match visit schedule");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("individual " + std::to_string(id) +
                                ": seroconversion offset must be finite and >= 0");
  for (double t : times)
    if (t < 0.0 || !std::isfinite(t))
      throw std::invalid_argument("individual " + std::to_string(id) +
                                  ": visit times must be finite and >= 0");
}

std::size_t PanelDataset::n_in_sample() const {
  return static_cast<std::size_t>(std::count_if(
      individuals.begin(), individuals.end(),
      [](const Individual& ind) { return ind.role == Role::InSample; }));
}

std::size_t PanelDataset::n_out_of_sample() const {
  return individuals.size() - n_in_sample();
}

void PanelDataset::validate() const {
  if (biomarker_names.empty()) throw std::invalid_argument("dataset has no biomarkers");
  for (const auto& ind : individuals) ind.validate(biomarker_names.size());
  std::map<int, int> seen;
  for (const auto& ind : individuals)
    if (++seen[ind.id] > 1)
      throw std::invalid_argument("duplicate individual id " + std::to_string(ind.id));
}

namespace {

constexpr const char* kHeader = "#serorec-dataset v1";

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
  }
}

int parse_int(const std::string& field, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void write_dataset(const PanelDataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  out << kHeader << '\n';
  out << "#meta scenario " << data.scenario << '\n';
  out << "#meta model " << data.model_label << '\n';
  out << "#meta replicate " << data.replicate << '\n';
  out << "#meta sero_interval " << g17(data.sero_interval) << '\n';
  out << "#meta biomarkers";
  for (const auto& name : data.biomarker_names) out << ' ' << name;
  out << '\n';
  for (const auto& ind : data.individuals)
    for (Eigen::Index c = 0; c < ind.random_effects.size(); ++c)
      out << "#fx " << ind.id << ' ' << c << ' ' << g17(ind.random_effects(c)) << '\n';
  out << "replicate,id,role,biomarker,j,t_ij,y,tau_truth\n";
  for (const auto& ind : data.individuals) {
    for (std::size_t k = 0; k < data.biomarker_names.size(); ++k) {
      for (std::size_t j = 0; j < ind.times.size(); ++j) {
        out << data.replicate << ',' << ind.id << ',' << role_name(ind.role) << ','
            << data.biomarker_names[k] << ',' << j << ',' << g17(ind.times[j]) << ','
            << g17(ind.y[k][j]) << ',' << g17(ind.tau) << '\n';
      }
    }
  }
  if (!out) throw ParseError("write failed: " + path.string());
}

PanelDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path.string());

  PanelDataset data;
  data.biomarker_names.clear();
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  ++line_no;
  if (line != kHeader)
    throw ParseError(path.string() + ": line 1: expected header '" + kHeader + "'");

  std::map<int, std::size_t> index_of;             // id -> position
  std::map<int, std::vector<std::pair<int, double>>> fx;  // id -> (coord, value)
  bool saw_columns = false;
  bool saw_replicate = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("#meta ", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::string key;
      ss >> key;
      if (key == "scenario") {
        ss >> data.scenario;
      } else if (key == "model") {
        ss >> data.model_label;
      } else if (key == "replicate") {
        int r = 0;
        ss >> r;
        data.replicate = r;
        saw_replicate = true;
      } else if (key == "sero_interval") {
        ss >> data.sero_interval;
      } else if (key == "biomarkers") {
        std::string name;
        while (ss >> name) data.biomarker_names.push_back(name);
      }
      // unknown #meta keys are skipped for forward compatibility
      continue;
    }
    if (line.rfind("#fx ", 0) == 0) {
      std::istringstream ss(line.substr(4));
      int id = 0, coord = 0;
      double value = 0.0;
      if (!(ss >> id >> coord >> value))
        throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": malformed coefficient record");
      fx[id].emplace_back(coord, value);
      continue;
    }
    if (line[0] == '#') continue;
    if (!saw_columns) {
      if (line != "replicate,id,role,biomarker,j,t_ij,y,tau_truth")
        throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": unexpected column header '" + line + "'");
      saw_columns = true;
      continue;
    }

    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 8)
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected 8 fields, got " +
                       std::to_string(f.size()));
    const int replicate = parse_int(f[0], line_no, "replicate");
    const int id = parse_int(f[1], line_no, "id");
    const Role role = role_from_name(f[2]);
    const std::string& biomarker = f[3];
    const int j = parse_int(f[4], line_no, "visit index");
    const double t = parse_double(f[5], line_no, "visit time");
    const double y = parse_double(f[6], line_no, "response");
    const double tau = parse_double(f[7], line_no, "seroconversion offset");

    if (saw_replicate && replicate != data.replicate)
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": replicate mismatch");
    const auto kit = std::find(data.biomarker_names.begin(), data.biomarker_names.end(), biomarker);
    if (kit == data.biomarker_names.end())
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": biomarker '" + biomarker + "' not declared in #meta biomarkers");
    const std::size_t k = static_cast<std::size_t>(kit - data.biomarker_names.begin());

    auto [it, inserted] = index_of.try_emplace(id, data.individuals.size());
    if (inserted) {
      Individual ind;
      ind.id = id;
      ind.role = role;
      ind.tau = tau;
      ind.y.resize(data.biomarker_names.size());
      data.individuals.push_back(std::move(ind));
    }
    Individual& ind = data.individuals[it->second];
    if (ind.role != role)
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": role changed for individual " + std::to_string(id));
    if (ind.tau != tau)
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": seroconversion offset changed for individual " + std::to_string(id));
    const std::size_t uj = static_cast<std::size_t>(j);
    if (uj == ind.times.size()) {
      ind.times.push_back(t);
    } else if (uj > ind.times.size()) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": visit index gap for individual " + std::to_string(id));
    } else if (ind.times[uj] != t) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": visit time mismatch for individual " + std::to_string(id));
    }
    if (ind.y[k].size() != uj)
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": out-of-order visit index for individual " + std::to_string(id));
    ind.y[k].push_back(y);
  }

  if (!saw_columns)
    throw ParseError(path.string() + ": missing observation rows");

  for (auto& [id, coords] : fx) {
    const auto it = index_of.find(id);
    if (it == index_of.end())
      throw ParseError(path.string() + ": coefficient record for unknown individual " +
                       std::to_string(id));
    Individual& ind = data.individuals[it->second];
    int dim = 0;
    for (const auto& [c, v] : coords) dim = std::max(dim, c + 1);
    ind.random_effects = Eigen::VectorXd::Zero(dim);
    for (const auto& [c, v] : coords) ind.random_effects(c) = v;
  }

  data.validate();
  return data;
}

PanelDataset truncate_followup(PanelDataset data, std::size_t n_visits) {
  if (n_visits == 0) throw std::invalid_argument("truncate_followup: need at least one visit");
  for (auto& ind : data.individuals) {
    if (ind.role != Role::OutOfSample) continue;
    if (ind.times.size() > n_visits) {
      ind.times.resize(n_visits);
      for (auto& series : ind.y) series.resize(n_visits);
    }
  }
  return data;
}

}  // namespace serorec
