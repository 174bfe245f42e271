#include "farm/agents/policy_net.hpp"

#include "farm/errors.hpp"

namespace farm {

using nn::Index;
using nn::Matrix;

Encoder::Encoder(const std::string& name, EncoderSpec spec) : spec_(std::move(spec)) {
  const auto& lay = spec_.layout;
  if (lay.scalar_size == 0 && !lay.has_sequence())
    throw ShapeError(name + ": observation layout is empty");
  if (!spec_.trunk.empty() && lay.scalar_size > 0) {
    nn::MlpSpec m;
    m.widths.push_back(static_cast<Index>(lay.scalar_size));
    m.widths.insert(m.widths.end(), spec_.trunk.begin(), spec_.trunk.end());
    m.activate_output = true;
    trunk_.emplace(name + ".trunk", m);
  }
  if (lay.has_sequence()) {
    nn::GruSpec g;
    g.input_size = static_cast<Index>(lay.channels);
    g.hidden_size = spec_.gru_hidden;
    g.dropout_rate = spec_.gru_dropout;
    gru_.emplace(name + ".gru", g);
  }
}

void Encoder::init(Rng& rng) {
  if (trunk_) trunk_->init(rng);
  if (gru_) gru_->init(rng);
}

Index Encoder::out_size() const {
  Index n = trunk_ ? trunk_->out_size() : static_cast<Index>(spec_.layout.scalar_size);
  if (gru_) n += gru_->spec().hidden_size;
  return n;
}

Matrix Encoder::forward(const Matrix& obs, bool training, Rng* rng, Cache* cache) const {
  const auto& lay = spec_.layout;
  if (obs.rows() != static_cast<Index>(lay.size()))
    throw ShapeError("observation width " + std::to_string(obs.rows()) + ", expected " +
                     std::to_string(lay.size()));
  const Index batch = obs.cols();
  const Index ns = static_cast<Index>(lay.scalar_size);
  Matrix out(out_size(), batch);
  if (trunk_)
    out.topRows(trunk_->out_size()) =
        trunk_->forward(obs.topRows(ns), cache ? &cache->trunk : nullptr);
  else if (ns > 0)
    out.topRows(ns) = obs.topRows(ns);
  if (gru_) {
    std::vector<Matrix> local;
    std::vector<Matrix>& seq = cache ? cache->sequence : local;
    seq.clear();
    seq.reserve(lay.horizon);
    const Index c = static_cast<Index>(lay.channels);
    for (std::size_t l = 0; l < lay.horizon; ++l)
      seq.push_back(obs.middleRows(ns + static_cast<Index>(l) * c, c));
    out.bottomRows(gru_->spec().hidden_size) =
        gru_->encode(seq, training, rng, cache ? &cache->gru : nullptr);
  }
  if (cache) cache->batch = batch;
  return out;
}

void Encoder::backward(const Cache& cache, const Matrix& d) {
  if (trunk_) trunk_->backward(cache.trunk, d.topRows(trunk_->out_size()));
  if (gru_) gru_->backward(cache.gru, d.bottomRows(gru_->spec().hidden_size));
}

nn::ParamList Encoder::params() {
  nn::ParamList out;
  if (trunk_) out = trunk_->params();
  if (gru_) {
    auto g = gru_->params();
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

HeadNet::HeadNet(const std::string& name, EncoderSpec spec, Index outputs, double head_gain)
    : encoder_(name + ".enc", std::move(spec)),
      head_(name + ".head", encoder_.out_size(), outputs),
      head_gain_(head_gain) {}

void HeadNet::init(Rng& rng) {
  encoder_.init(rng);
  head_.init(head_gain_, rng);
}

Matrix HeadNet::forward(const Matrix& obs, bool training, Rng* rng, Cache* cache) const {
  Matrix f = encoder_.forward(obs, training, rng, cache ? &cache->encoder : nullptr);
  Matrix y = head_.forward(f);
  if (cache) cache->features = std::move(f);
  return y;
}

void HeadNet::backward(const Cache& cache, const Matrix& d_out) {
  encoder_.backward(cache.encoder, head_.backward(cache.features, d_out));
}

nn::ParamList HeadNet::params() {
  auto out = encoder_.params();
  out.push_back(&head_.weight());
  out.push_back(&head_.bias());
  return out;
}

ActorCritic::ActorCritic(const EncoderSpec& spec, std::size_t actions, bool shared, Rng& rng)
    : shared_(shared), actor_enc_("actor.enc", spec) {
  if (!shared_) critic_enc_ = Encoder("critic.enc", spec);
  actor_head_ = nn::Dense("actor.head", actor_enc_.out_size(), static_cast<Index>(actions));
  critic_head_ = nn::Dense("critic.head", actor_enc_.out_size(), 1);
  actor_enc_.init(rng);
  if (!shared_) critic_enc_.init(rng);
  actor_head_.init(0.01, rng);
  critic_head_.init(1.0, rng);
}

ActorCritic::Output ActorCritic::forward(const Matrix& obs, bool training, Rng* rng) const {
  Output o;
  o.actor_features = actor_enc_.forward(obs, training, rng, &o.actor_enc);
  o.logits = actor_head_.forward(o.actor_features);
  if (shared_) {
    o.values = critic_head_.forward(o.actor_features);
  } else {
    o.critic_features = critic_enc_.forward(obs, training, rng, &o.critic_enc);
    o.values = critic_head_.forward(o.critic_features);
  }
  return o;
}

void ActorCritic::backward(const Output& o, const Matrix& d_logits, const Matrix& d_values) {
  Matrix d_actor = actor_head_.backward(o.actor_features, d_logits);
  if (shared_) {
    d_actor += critic_head_.backward(o.actor_features, d_values);
    actor_enc_.backward(o.actor_enc, d_actor);
  } else {
    actor_enc_.backward(o.actor_enc, d_actor);
    critic_enc_.backward(o.critic_enc, critic_head_.backward(o.critic_features, d_values));
  }
}

nn::ParamList ActorCritic::params() {
  auto out = actor_enc_.params();
  out.push_back(&actor_head_.weight());
  out.push_back(&actor_head_.bias());
  if (!shared_) {
    auto c = critic_enc_.params();
    out.insert(out.end(), c.begin(), c.end());
  }
  out.push_back(&critic_head_.weight());
  out.push_back(&critic_head_.bias());
  return out;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    m.col(static_cast<Index>(j)) =
        Eigen::Map<const nn::Vector>(rows[j].data(), static_cast<Index>(rows[j].size()));
  return m;
}

Matrix to_matrix(const std::vector<double>& row) {
  return Eigen::Map<const nn::Vector>(row.data(), static_cast<Index>(row.size()));
}

Matrix gather_columns(const std::vector<std::vector<double>>& rows,
                      const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
  Matrix m(static_cast<Index>(rows.front().size()), static_cast<Index>(end - begin));
  for (std::size_t j = begin; j < end; ++j) {
    const auto& r = rows[idx[j]];
    m.col(static_cast<Index>(j - begin)) =
        Eigen::Map<const nn::Vector>(r.data(), static_cast<Index>(r.size()));
  }
  return m;
}

}  // namespace farm
