// src/container.cc

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

#include "breathid/container.h"

#include <cstring>
#include <fstream>
#include <iterator>

#include "breathid/error.h"

namespace breathid {

namespace {

constexpr char kMagic[4] = {'B', 'R', 'T', 'H'};
constexpr uint32_t kDtypeF64 = 0;

template <typename T>
void PutLe(std::string *out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out->push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string &data, const std::string &where) : data_(data), where_(where) {}

  template <typename T>
  T Le() {
    Need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  void Need(std::size_t n) const {
    if (data_.size() - pos_ < n) Fail(ErrorCode::kFormat, where_ + ": truncated container");
  }

  const std::string &data_;
  std::string where_;
  std::size_t pos_ = 0;
};

uint64_t Product(const std::vector<uint64_t> &dims) {
  uint64_t n = 1;
  for (uint64_t d : dims) n *= d;
  return n;
}

}  // namespace

void ModelContainer::Put(Record record) {
  Require(!record.name.empty(), "record name must not be empty");
  Require(Product(record.dims) == record.values.size(),
          "record '" + record.name + "' has a size that does not match its dims");
  for (auto &r : records_) {
    if (r.name == record.name) {
      r = std::move(record);
      return;
    }
  }
  records_.push_back(std::move(record));
}

void ModelContainer::PutMatrix(const std::string &name, const Eigen::MatrixXd &m) {
  Record r{name, {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())}, {}};
  r.values.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.values.push_back(m(i, j));
  Put(std::move(r));
}

void ModelContainer::PutVector(const std::string &name, const Eigen::VectorXd &v) {
  Put({name, {static_cast<uint64_t>(v.size())}, {v.data(), v.data() + v.size()}});
}

void ModelContainer::PutScalar(const std::string &name, double x) { Put({name, {}, {x}}); }

bool ModelContainer::Has(const std::string &name) const {
  for (const auto &r : records_)
    if (r.name == name) return true;
  return false;
}

const Record &ModelContainer::Get(const std::string &name) const {
  for (const auto &r : records_)
    if (r.name == name) return r;
  Fail(ErrorCode::kNotFound, "container has no record '" + name + "'");
}

Eigen::MatrixXd ModelContainer::GetMatrix(const std::string &name) const {
  const Record &r = Get(name);
  if (r.dims.size() != 2)
    Fail(ErrorCode::kFormat, "record '" + name + "' is not a matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r.dims[0]), static_cast<Eigen::Index>(r.dims[1]));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.values[k++];
  return m;
}

Eigen::VectorXd ModelContainer::GetVector(const std::string &name) const {
  const Record &r = Get(name);
  if (r.dims.size() != 1)
    Fail(ErrorCode::kFormat, "record '" + name + "' is not a vector");
  return Eigen::Map<const Eigen::VectorXd>(r.values.data(),
                                           static_cast<Eigen::Index>(r.values.size()));
}

double ModelContainer::GetScalar(const std::string &name) const {
  const Record &r = Get(name);
  if (!r.dims.empty()) Fail(ErrorCode::kFormat, "record '" + name + "' is not a scalar");
  return r.values[0];
}

void ModelContainer::Merge(const ModelContainer &other) {
  for (const auto &r : other.records_) Put(r);
}

void ModelContainer::Write(const std::filesystem::path &path) const {
  std::string out(kMagic, 4);
  PutLe<uint32_t>(&out, kContainerVersion);
  PutLe<uint32_t>(&out, static_cast<uint32_t>(records_.size()));
  for (const auto &r : records_) {
    PutLe<uint32_t>(&out, static_cast<uint32_t>(r.name.size()));
    out += r.name;
    PutLe<uint32_t>(&out, kDtypeF64);
    PutLe<uint32_t>(&out, static_cast<uint32_t>(r.dims.size()));
    for (uint64_t d : r.dims) PutLe<uint64_t>(&out, d);
    for (double x : r.values) {
      uint64_t bits;
      std::memcpy(&bits, &x, sizeof(bits));
      PutLe<uint64_t>(&out, bits);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) Fail(ErrorCode::kIo, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

ModelContainer ModelContainer::Read(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) Fail(ErrorCode::kNotFound, "cannot open container " + path.string());
  const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader in(data, path.string());
  if (in.Bytes(4) != std::string(kMagic, 4))
    Fail(ErrorCode::kFormat, path.string() + ": not a BRTH container");
  const auto version = in.Le<uint32_t>();
  if (version != kContainerVersion)
    Fail(ErrorCode::kFormat, path.string() + ": unsupported container version " +
                                 std::to_string(version));
  const auto count = in.Le<uint32_t>();
  ModelContainer c;
  for (uint32_t i = 0; i < count; ++i) {
    Record r;
    r.name = in.Bytes(in.Le<uint32_t>());
    const auto dtype = in.Le<uint32_t>();
    if (dtype != kDtypeF64)
      Fail(ErrorCode::kFormat, path.string() + ": record '" + r.name + "' has unknown dtype " +
                                   std::to_string(dtype));
    const auto rank = in.Le<uint32_t>();
    for (uint32_t k = 0; k < rank; ++k) r.dims.push_back(in.Le<uint64_t>());
    // Bound the running product by the file size so it cannot wrap.
    uint64_t n = 1;
    for (uint64_t d : r.dims) {
      if (d != 0 && n > data.size() / 8 / d)
        Fail(ErrorCode::kFormat, path.string() + ": record '" + r.name + "' overruns the file");
      n *= d;
    }
    r.values.resize(n);
    for (auto &x : r.values) {
      const auto bits = in.Le<uint64_t>();
      std::memcpy(&x, &bits, sizeof(x));
    }
    if (c.Has(r.name))
      Fail(ErrorCode::kFormat, path.string() + ": duplicate record '" + r.name + "'");
    c.records_.push_back(std::move(r));
  }
  if (!in.AtEnd()) Fail(ErrorCode::kFormat, path.string() + ": trailing bytes after records");
  return c;
}

}  // namespace breathid
