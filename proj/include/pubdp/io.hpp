#ifndef PUBDP_IO_HPP
#define PUBDP_IO_HPP

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pubdp/errors.hpp"
#include "pubdp/gaussian.hpp"

namespace pubdp {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Write a dataset as plain CSV (one row per line), with a sidecar
/// `<path>.meta.json` recording the shape and whether a trailing label
/// column is present.
inline void write_dataset_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("write_dataset_csv: cannot open " + path);
  const bool labeled = data.has_labels();
  for (Eigen::Index i = 0; i < data.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.rows.cols(); ++j) {
      if (j > 0) out << ',';
      out << detail::fmt_double(data.rows(i, j));
    }
    if (labeled) out << ',' << data.labels[static_cast<std::size_t>(i)];
    out << '\n';
  }
  nlohmann::json meta;
  meta["rows"] = data.rows.rows();
  meta["cols"] = data.rows.cols();
  meta["has_labels"] = labeled;
  std::ofstream mout(path + ".meta.json");
  if (!mout) throw InputError("write_dataset_csv: cannot open " + path + ".meta.json");
  mout << meta.dump(2) << '\n';
}

/// Read a dataset written by write_dataset_csv. The sidecar metadata file is
/// consulted for the label flag; if it is missing, all columns are treated
/// as coordinates.
inline LabeledDataset read_dataset_csv(const std::string& path) {
  bool labeled = false;
  {
    std::ifstream mfile(path + ".meta.json");
    if (mfile) {
      nlohmann::json meta;
      mfile >> meta;
      labeled = meta.value("has_labels", false);
    }
  }
  std::ifstream in(path);
  if (!in) throw InputError("read_dataset_csv: cannot open " + path);
  std::vector<std::vector<double>> values;
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("read_dataset_csv: bad number at line " + std::to_string(line_no));
      }
    }
    if (!values.empty() && row.size() != values.front().size() + (labeled ? 1 : 0))
      throw InputError("read_dataset_csv: ragged row at line " + std::to_string(line_no));
    if (labeled) {
      labels.push_back(static_cast<int>(row.back()));
      row.pop_back();
    }
    values.push_back(std::move(row));
  }
  LabeledDataset data;
  const Eigen::Index n = static_cast<Eigen::Index>(values.size());
  const Eigen::Index d = n > 0 ? static_cast<Eigen::Index>(values.front().size()) : 0;
  data.rows.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      data.rows(i, j) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  data.labels = std::move(labels);
  return data;
}

inline nlohmann::json mixture_to_json(const MixtureParams& params) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& comp : params.components) {
    nlohmann::json c;
    c["mean"] = std::vector<double>(comp.params.mean.data(),
                                    comp.params.mean.data() + comp.params.mean.size());
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index i = 0; i < comp.params.cov.rows(); ++i) {
      std::vector<double> row(comp.params.cov.cols());
      for (Eigen::Index j = 0; j < comp.params.cov.cols(); ++j) row[static_cast<std::size_t>(j)] = comp.params.cov(i, j);
      cov.push_back(row);
    }
    c["cov"] = cov;
    c["weight"] = comp.weight;
    comps.push_back(c);
  }
  return nlohmann::json{{"components", comps}};
}

inline MixtureParams mixture_from_json(const nlohmann::json& j) {
  if (!j.contains("components")) throw InputError("mixture_from_json: missing 'components'");
  MixtureParams params;
  for (const auto& c : j.at("components")) {
    MixtureComponent comp;
    const auto mean = c.at("mean").get<std::vector<double>>();
    comp.params.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                         static_cast<Eigen::Index>(mean.size()));
    const auto& cov = c.at("cov");
    const Eigen::Index d = static_cast<Eigen::Index>(cov.size());
    comp.params.cov.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto row = cov.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != d)
        throw InputError("mixture_from_json: cov is not square");
      for (Eigen::Index k2 = 0; k2 < d; ++k2) comp.params.cov(i, k2) = row[static_cast<std::size_t>(k2)];
    }
    comp.weight = c.at("weight").get<double>();
    params.components.push_back(std::move(comp));
  }
  params.validate();
  return params;
}

inline void write_mixture_json(const std::string& path, const MixtureParams& params) {
  std::ofstream out(path);
  if (!out) throw InputError("write_mixture_json: cannot open " + path);
  out << mixture_to_json(params).dump(2) << '\n';
}

inline MixtureParams read_mixture_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("read_mixture_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return mixture_from_json(j);
}

}  // namespace pubdp

#endif  // PUBDP_IO_HPP
