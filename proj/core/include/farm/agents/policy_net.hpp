#pragma once

#include <optional>
#include <string>
#include <vector>

#include "farm/agents/environment.hpp"
#include "farm/neural/gru.hpp"
#include "farm/neural/mlp.hpp"

namespace farm {

struct EncoderSpec {
  ObservationLayout layout;
  std::vector<Eigen::Index> trunk{64, 64};  // hidden widths of the scalar trunk
  Eigen::Index gru_hidden = 32;            // used only when the layout has a sequence
  double gru_dropout = 0.10;
};

/// Scalar features -> tanh MLP trunk; forecast block -> GRU -> dropout;
/// output is the concatenation [trunk; gru].
class Encoder {
 public:
  struct Cache {
    nn::Mlp::Cache trunk;
    nn::Gru::Cache gru;
    std::vector<nn::Matrix> sequence;
    nn::Index batch = 0;
  };

  Encoder() = default;
  Encoder(const std::string& name, EncoderSpec spec);

  void init(Rng& rng);
  nn::Matrix forward(const nn::Matrix& obs, bool training, Rng* rng, Cache* cache = nullptr) const;
  void backward(const Cache& cache, const nn::Matrix& d_features);

  Eigen::Index out_size() const;
  const EncoderSpec& spec() const { return spec_; }
  nn::ParamList params();

 private:
  EncoderSpec spec_;
  std::optional<nn::Mlp> trunk_;
  std::optional<nn::Gru> gru_;
};

/// Encoder followed by a linear head.
class HeadNet {
 public:
  struct Cache {
    Encoder::Cache encoder;
    nn::Matrix features;
  };

  HeadNet() = default;
  HeadNet(const std::string& name, EncoderSpec spec, Eigen::Index outputs, double head_gain);

  void init(Rng& rng);
  nn::Matrix forward(const nn::Matrix& obs, bool training, Rng* rng, Cache* cache = nullptr) const;
  void backward(const Cache& cache, const nn::Matrix& d_out);
  nn::ParamList params();
  Eigen::Index outputs() const { return head_.out_size(); }

 private:
  Encoder encoder_;
  nn::Dense head_;
  double head_gain_ = 1.0;
};

/// Actor and critic. With `shared` both heads sit on one encoder (the
/// forecast-aware layout); otherwise each has its own encoder.
class ActorCritic {
 public:
  struct Output {
    nn::Matrix logits;  // actions x batch
    nn::Matrix values;  // 1 x batch
    Encoder::Cache actor_enc;
    Encoder::Cache critic_enc;
    nn::Matrix actor_features;
    nn::Matrix critic_features;
  };

  ActorCritic(const EncoderSpec& spec, std::size_t actions, bool shared, Rng& rng);

  Output forward(const nn::Matrix& obs, bool training, Rng* rng) const;
  void backward(const Output& out, const nn::Matrix& d_logits, const nn::Matrix& d_values);
  nn::ParamList params();
  bool shared() const { return shared_; }

 private:
  bool shared_;
  Encoder actor_enc_;
  Encoder critic_enc_;
  nn::Dense actor_head_;
  nn::Dense critic_head_;
};

inline EncoderSpec with_layout(EncoderSpec spec, const ObservationLayout& layout) {
  spec.layout = layout;
  return spec;
}

/// Column matrix from observation rows.
nn::Matrix to_matrix(const std::vector<std::vector<double>>& rows);
nn::Matrix to_matrix(const std::vector<double>& row);
nn::Matrix gather_columns(const std::vector<std::vector<double>>& rows,
                          const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end);

}  // namespace farm
