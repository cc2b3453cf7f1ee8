// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "apirec/error.hpp"

namespace apirec {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Dense row-major tensor of rank 1 or 2.
template <typename T>
struct BasicTensor {
  std::vector<std::int64_t> shape;
  std::vector<T> values;

  BasicTensor() = default;
  explicit BasicTensor(std::vector<std::int64_t> s)
      : shape(std::move(s)), values(static_cast<std::size_t>(numel_of(shape)), T{0}) {}

  static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::int64_t{1}, std::multiplies<>());
  }
  std::int64_t numel() const { return static_cast<std::int64_t>(values.size()); }
  Eigen::Index rows() const { return shape.empty() ? 1 : static_cast<Eigen::Index>(shape[0]); }
  Eigen::Index cols() const {
    return shape.size() < 2 ? 1 : static_cast<Eigen::Index>(numel() / shape[0]);
  }

  Eigen::Map<Matrix<T>> matrix() { return {values.data(), rows(), cols()}; }
  Eigen::Map<const Matrix<T>> matrix() const { return {values.data(), rows(), cols()}; }
  Eigen::Map<Vector<T>> vector() { return {values.data(), numel()}; }
  Eigen::Map<const Vector<T>> vector() const { return {values.data(), numel()}; }

  bool operator==(const BasicTensor&) const = default;
};

using Tensor = BasicTensor<float>;

/// Named parameters. Ordered so that iteration and serialization are stable.
template <typename T>
using ParamSet = std::map<std::string, BasicTensor<T>>;

template <typename T>
const BasicTensor<T>& require(const ParamSet<T>& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw ShapeError("missing tensor '" + name + "'");
  return it->second;
}

template <typename T>
BasicTensor<T>& require(ParamSet<T>& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw ShapeError("missing tensor '" + name + "'");
  return it->second;
}

/// Same names and shapes, all zeros.
template <typename T>
ParamSet<T> zeros_like(const ParamSet<T>& params) {
  ParamSet<T> out;
  for (const auto& [name, t] : params) out.emplace(name, BasicTensor<T>(t.shape));
  return out;
}

template <typename To, typename From>
ParamSet<To> cast_params(const ParamSet<From>& params) {
  ParamSet<To> out;
  for (const auto& [name, t] : params) {
    BasicTensor<To> c(t.shape);
    for (std::size_t i = 0; i < t.values.size(); ++i) c.values[i] = static_cast<To>(t.values[i]);
    out.emplace(name, std::move(c));
  }
  return out;
}

template <typename T>
T sigmoid(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

template <typename T>
void fill_zero(ParamSet<T>& params) {
  for (auto& [name, t] : params) std::fill(t.values.begin(), t.values.end(), T{0});
}

}  // namespace apirec
