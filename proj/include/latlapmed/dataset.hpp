// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <latlapmed/common.hpp>

namespace latlapmed {

// Feature matrix with partially observed utility labels and optional ground
// truth kept for evaluation only.  Labels: +1 / -1, 0 = unobserved.
struct Dataset {
  Matrix features;  // n x p
  std::vector<int8_t> labels;
  std::optional<std::vector<uint8_t>> truth_anomaly;
  std::optional<std::vector<int8_t>> truth_utility;  // +1 / -1 signs
  std::vector<std::string> feature_names;

  Index n() const { return features.rows(); }
  Index p() const { return features.cols(); }
  Index labeled_count() const;

  // Throws ValidationError on inconsistent sizes, non-finite features,
  // bad label values, or a labeled point marked non-anomalous.
  void validate() const;
};

// Labeled subset in ascending index order.
struct LabelView {
  std::vector<Index> indices;
  std::vector<int8_t> signs;
  Index size() const { return static_cast<Index>(indices.size()); }
};

struct CsvColumns {
  std::string label = "label";
  // Empty name means the column is absent.
  std::string truth_anomaly = "truth_anomaly";
  std::string truth_utility = "truth_utility";
};

// CSV with a header row; features are every column not named below.  Labels
// are "1", "-1" or empty; truth columns are "0"/"1".  Errors name the
// offending row and column.  Feature values round-trip bit exactly through
// save_csv/load_csv.
Dataset load_csv(const std::filesystem::path& path, const CsvColumns& cols = {});
void save_csv(const Dataset& d, const std::filesystem::path& path,
              const CsvColumns& cols = {});

LabelView label_view(const Dataset& d);

}  // namespace latlapmed
