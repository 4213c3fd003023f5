// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/dataset.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace latlapmed {
namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.pop_back();
  }
  size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, Index row, const std::string& col) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ValidationError("row " + std::to_string(row) + " column " + col +
                          ": malformed numeric value '" + cell + "'");
  }
  if (!std::isfinite(v)) {
    throw ValidationError("row " + std::to_string(row) + " column " + col +
                          ": non-finite value '" + cell + "'");
  }
  return v;
}

// Shortest decimal string that round-trips the exact double.
std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Index Dataset::labeled_count() const {
  return static_cast<Index>(
      std::count_if(labels.begin(), labels.end(), [](int8_t v) { return v != 0; }));
}

void Dataset::validate() const {
  Index m = n();
  if (static_cast<Index>(labels.size()) != m) {
    throw ValidationError("dataset: label count does not match row count");
  }
  if (!features.allFinite()) {
    throw ValidationError("dataset: non-finite feature values");
  }
  for (Index i = 0; i < m; ++i) {
    int8_t v = labels[static_cast<size_t>(i)];
    if (v != 0 && v != 1 && v != -1) {
      throw ValidationError("dataset: label at row " + std::to_string(i) +
                            " is not in {+1, -1, unobserved}");
    }
  }
  if (truth_anomaly) {
    if (static_cast<Index>(truth_anomaly->size()) != m) {
      throw ValidationError("dataset: truth_anomaly length mismatch");
    }
    for (Index i = 0; i < m; ++i) {
      if (labels[static_cast<size_t>(i)] != 0 &&
          !(*truth_anomaly)[static_cast<size_t>(i)]) {
        throw ValidationError("dataset: labeled row " + std::to_string(i) +
                              " is marked non-anomalous in truth_anomaly");
      }
    }
  }
  if (truth_utility) {
    if (static_cast<Index>(truth_utility->size()) != m) {
      throw ValidationError("dataset: truth_utility length mismatch");
    }
    for (Index i = 0; i < m; ++i) {
      int8_t v = (*truth_utility)[static_cast<size_t>(i)];
      if (v != 1 && v != -1) {
        throw ValidationError("dataset: truth_utility at row " +
                              std::to_string(i) + " is not a sign");
      }
    }
  }
  if (!feature_names.empty() &&
      static_cast<Index>(feature_names.size()) != p()) {
    throw ValidationError("dataset: feature name count mismatch");
  }
}

Dataset load_csv(const std::filesystem::path& path, const CsvColumns& cols) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path.string() + ": empty file");
  }
  std::vector<std::string> header = split_line(line);

  Index label_col = -1, ta_col = -1, tu_col = -1;
  std::vector<Index> feature_cols;
  std::vector<std::string> feature_names;
  for (Index c = 0; c < static_cast<Index>(header.size()); ++c) {
    const std::string& name = header[static_cast<size_t>(c)];
    if (name == cols.label) {
      label_col = c;
    } else if (!cols.truth_anomaly.empty() && name == cols.truth_anomaly) {
      ta_col = c;
    } else if (!cols.truth_utility.empty() && name == cols.truth_utility) {
      tu_col = c;
    } else {
      feature_cols.push_back(c);
      feature_names.push_back(name);
    }
  }
  if (label_col < 0) {
    throw ValidationError(path.string() + ": label column '" + cols.label +
                          "' not found");
  }
  if (feature_cols.empty()) {
    throw ValidationError(path.string() + ": no feature columns");
  }

  std::vector<std::vector<double>> rows;
  std::vector<int8_t> labels;
  std::vector<uint8_t> truth_anomaly;
  std::vector<int8_t> truth_utility;
  Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    }
    std::vector<double> feats(feature_cols.size());
    for (size_t f = 0; f < feature_cols.size(); ++f) {
      feats[f] = parse_double(cells[static_cast<size_t>(feature_cols[f])], row,
                              feature_names[f]);
    }
    const std::string& lab = cells[static_cast<size_t>(label_col)];
    if (lab.empty()) {
      labels.push_back(0);
    } else if (lab == "1") {
      labels.push_back(1);
    } else if (lab == "-1") {
      labels.push_back(-1);
    } else {
      throw ValidationError("row " + std::to_string(row) + " column " +
                            cols.label + ": label must be 1, -1 or empty, got '" +
                            lab + "'");
    }
    if (ta_col >= 0) {
      const std::string& cell = cells[static_cast<size_t>(ta_col)];
      if (cell != "0" && cell != "1") {
        throw ValidationError("row " + std::to_string(row) + " column " +
                              cols.truth_anomaly + ": expected 0 or 1, got '" +
                              cell + "'");
      }
      truth_anomaly.push_back(cell == "1" ? 1 : 0);
    }
    if (tu_col >= 0) {
      const std::string& cell = cells[static_cast<size_t>(tu_col)];
      if (cell != "0" && cell != "1") {
        throw ValidationError("row " + std::to_string(row) + " column " +
                              cols.truth_utility + ": expected 0 or 1, got '" +
                              cell + "'");
      }
      truth_utility.push_back(cell == "1" ? 1 : -1);
    }
    rows.push_back(std::move(feats));
    ++row;
  }
  if (rows.empty()) {
    throw ValidationError(path.string() + ": no data rows");
  }

  Dataset d;
  d.features.resize(static_cast<Index>(rows.size()),
                    static_cast<Index>(feature_cols.size()));
  for (Index i = 0; i < d.features.rows(); ++i) {
    for (Index j = 0; j < d.features.cols(); ++j) {
      d.features(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  d.labels = std::move(labels);
  if (ta_col >= 0) d.truth_anomaly = std::move(truth_anomaly);
  if (tu_col >= 0) d.truth_utility = std::move(truth_utility);
  d.feature_names = std::move(feature_names);
  if (d.labeled_count() == 0) {
    throw ValidationError(path.string() + ": no observed labels");
  }
  d.validate();
  return d;
}

void save_csv(const Dataset& d, const std::filesystem::path& path,
              const CsvColumns& cols) {
  d.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot write " + path.string());
  }
  for (Index j = 0; j < d.p(); ++j) {
    std::string name = d.feature_names.empty()
                           ? "x" + std::to_string(j)
                           : d.feature_names[static_cast<size_t>(j)];
    out << name << ',';
  }
  out << cols.label;
  if (d.truth_anomaly) out << ',' << cols.truth_anomaly;
  if (d.truth_utility) out << ',' << cols.truth_utility;
  out << '\n';
  for (Index i = 0; i < d.n(); ++i) {
    for (Index j = 0; j < d.p(); ++j) {
      out << format_double(d.features(i, j)) << ',';
    }
    int8_t lab = d.labels[static_cast<size_t>(i)];
    if (lab == 1) {
      out << '1';
    } else if (lab == -1) {
      out << "-1";
    }
    if (d.truth_anomaly) {
      out << ',' << ((*d.truth_anomaly)[static_cast<size_t>(i)] ? '1' : '0');
    }
    if (d.truth_utility) {
      out << ',' << ((*d.truth_utility)[static_cast<size_t>(i)] == 1 ? '1' : '0');
    }
    out << '\n';
  }
  if (!out.good()) {
    throw ValidationError("write failed for " + path.string());
  }
}

LabelView label_view(const Dataset& d) {
  LabelView v;
  for (Index i = 0; i < d.n(); ++i) {
    int8_t lab = d.labels[static_cast<size_t>(i)];
    if (lab != 0) {
      v.indices.push_back(i);
      v.signs.push_back(lab);
    }
  }
  return v;
}

}  // namespace latlapmed
