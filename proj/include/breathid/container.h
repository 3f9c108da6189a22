// breathid/container.h

// Copyright 2026  The breathid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// BRTH model container: "BRTH", u32 version, u32 record count, then per
// record a u32-length-prefixed UTF-8 name, u32 dtype (0 = f64), u32 rank,
// u64 dims and row-major little-endian values.

#ifndef BREATHID_CONTAINER_H_
#define BREATHID_CONTAINER_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace breathid {

inline constexpr uint32_t kContainerVersion = 1;

struct Record {
  std::string name;
  std::vector<uint64_t> dims;  // empty for a scalar
  std::vector<double> values;  // row-major

  bool operator==(const Record &) const = default;
};

class ModelContainer {
 public:
  /// Adds a record, replacing the values of an existing one in place so the
  /// record order stays stable.
  void Put(Record record);
  void PutMatrix(const std::string &name, const Eigen::MatrixXd &m);
  void PutVector(const std::string &name, const Eigen::VectorXd &v);
  void PutScalar(const std::string &name, double x);

  bool Has(const std::string &name) const;
  /// Throws Error(kNotFound) naming the record when absent, and
  /// Error(kFormat) when the rank is wrong.
  const Record &Get(const std::string &name) const;
  Eigen::MatrixXd GetMatrix(const std::string &name) const;
  Eigen::VectorXd GetVector(const std::string &name) const;
  double GetScalar(const std::string &name) const;

  const std::vector<Record> &records() const { return records_; }
  bool operator==(const ModelContainer &) const = default;

  /// Merges every record of other into this one.
  void Merge(const ModelContainer &other);

  void Write(const std::filesystem::path &path) const;
  static ModelContainer Read(const std::filesystem::path &path);

 private:
  std::vector<Record> records_;
};

}  // namespace breathid

#endif  // BREATHID_CONTAINER_H_
