// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "apirec/encoder.hpp"

namespace apirec {

/// How a (mashup, API) pair is encoded before the task layer.
enum class MatchMode {
  CrossEncode,     // one joint sequence, task layer F -> 1 on its pooler
  BiEncodeConcat,  // two separate sequences, task layer 2F -> 1 on both poolers
};

std::string_view to_string(MatchMode mode);
MatchMode parse_match_mode(std::string_view text);

/// Both task layers are always present so ablations share a checkpoint layout.
std::vector<std::pair<std::string, std::vector<std::int64_t>>> match_head_shapes(int hidden);

void init_match_head(int hidden, ParamSet<float>& params, std::mt19937_64& rng);

/// Pre-sigmoid pair logit. `pooler_b` is used only in BiEncodeConcat mode.
template <typename T>
T match_logit(MatchMode mode, const ParamSet<T>& params, const Vector<T>& pooler_a,
              const Vector<T>& pooler_b);

/// Gradient of the task layer given d(logit); fills the pooler gradients.
template <typename T>
void match_backward(MatchMode mode, const ParamSet<T>& params, const Vector<T>& pooler_a,
                    const Vector<T>& pooler_b, T d_logit, ParamSet<T>& grads, Vector<T>& d_a,
                    Vector<T>& d_b);

}  // namespace apirec
