#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "habcov/rng.hpp"

namespace habcov::nets {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
struct ParamRef {
  std::string name;
  Mat<S>* value;
  Mat<S>* grad;
};

template <class S>
struct Linear {
  Mat<S> w;   // out x in
  Mat<S> b;   // out x 1
  Mat<S> dw;
  Mat<S> db;

  void init(int out, int in, Rng& rng) {
    w.resize(out, in);
    b.resize(out, 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int c = 0; c < in; ++c) {
      for (int r = 0; r < out; ++r) {
        w(r, c) = static_cast<S>(rng.uniform(-bound, bound));
      }
    }
    for (int r = 0; r < out; ++r) {
      b(r, 0) = static_cast<S>(rng.uniform(-bound, bound));
    }
    dw.setZero(out, in);
    db.setZero(out, 1);
  }

  Mat<S> forward(const Mat<S>& x) const {
    return (w * x).colwise() + b.col(0);
  }

  // x: the cached input; dy: upstream gradient. Accumulates parameter grads
  // and returns the gradient wrt x.
  Mat<S> backward(const Mat<S>& x, const Mat<S>& dy) {
    dw.noalias() += dy * x.transpose();
    db.noalias() += dy.rowwise().sum();
    return w.transpose() * dy;
  }

  void zero_grad() {
    dw.setZero();
    db.setZero();
  }

  void collect(std::vector<ParamRef<S>>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w, &dw});
    out.push_back({prefix + ".b", &b, &db});
  }
};

// Fully connected net, rectifier on every layer but the last.
template <class S>
struct Mlp {
  std::vector<Linear<S>> layers;

  void init(const std::vector<int>& sizes, Rng& rng) {
    layers.clear();
    layers.resize(sizes.size() - 1);
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      layers[i].init(sizes[i + 1], sizes[i], rng);
    }
  }

  struct Cache {
    // acts[i] is the input to layer i; acts.back() is the final output.
    std::vector<Mat<S>> acts;
  };

  Mat<S> forward(const Mat<S>& x, Cache* cache = nullptr) const {
    Mat<S> a = x;
    if (cache) {
      cache->acts.clear();
      cache->acts.push_back(a);
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      a = layers[i].forward(a);
      if (i + 1 < layers.size()) a = a.cwiseMax(S(0));
      if (cache) cache->acts.push_back(a);
    }
    return a;
  }

  Mat<S> backward(const Mat<S>& dy, const Cache& cache) {
    Mat<S> d = dy;
    for (std::size_t i = layers.size(); i-- > 0;) {
      if (i + 1 < layers.size()) {
        // acts[i + 1] is the post-rectifier input of the next layer.
        d = d.cwiseProduct(
            (cache.acts[i + 1].array() > S(0)).template cast<S>().matrix());
      }
      d = layers[i].backward(cache.acts[i], d);
    }
    return d;
  }

  void zero_grad() {
    for (auto& l : layers) l.zero_grad();
  }

  void collect(std::vector<ParamRef<S>>& out, const std::string& prefix) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].collect(out, prefix + ".l" + std::to_string(i));
    }
  }
};

template <class S>
S elu(S x) {
  return x > S(0) ? x : static_cast<S>(std::expm1(static_cast<double>(x)));
}

template <class S>
S elu_grad(S x) {
  return x > S(0) ? S(1) : static_cast<S>(std::exp(static_cast<double>(x)));
}

// State-conditioned monotone mixer: hypernetworks generate the mixing weights
// from the global state, absolute value keeps dQtot/dq_i >= 0.
template <class S>
struct Mixer {
  int n_agents = 0;
  int state_dim = 0;
  int embed = 64;

  Linear<S> hyper_w1;  // state -> embed * n_agents
  Linear<S> hyper_b1;  // state -> embed
  Linear<S> hyper_w2;  // state -> embed
  Linear<S> hyper_v1;  // state -> embed, rectified
  Linear<S> hyper_v2;  // embed -> 1 (state-dependent scalar bias)

  void init(int agents, int state_dimension, int embed_dim, Rng& rng) {
    n_agents = agents;
    state_dim = state_dimension;
    embed = embed_dim;
    hyper_w1.init(embed * n_agents, state_dim, rng);
    hyper_b1.init(embed, state_dim, rng);
    hyper_w2.init(embed, state_dim, rng);
    hyper_v1.init(embed, state_dim, rng);
    hyper_v2.init(1, embed, rng);
  }

  struct Cache {
    Mat<S> state;
    Mat<S> q;
    Mat<S> w1_raw;
    Mat<S> b1;
    Mat<S> w2_raw;
    Mat<S> v_hidden;
    Mat<S> h_pre;
    Mat<S> h;
  };

  // q: n_agents x B chosen-action values; state: state_dim x B.
  Mat<S> forward(const Mat<S>& q, const Mat<S>& state, Cache* cache) const {
    const Eigen::Index batch = q.cols();
    Mat<S> w1_raw = hyper_w1.forward(state);
    Mat<S> b1 = hyper_b1.forward(state);
    Mat<S> w2_raw = hyper_w2.forward(state);
    Mat<S> v_hidden = hyper_v1.forward(state).cwiseMax(S(0));
    Mat<S> b2 = hyper_v2.forward(v_hidden);

    Mat<S> h_pre(embed, batch), h(embed, batch), qtot(1, batch);
    for (Eigen::Index j = 0; j < batch; ++j) {
      Eigen::Map<const Mat<S>> w1(w1_raw.col(j).data(), embed, n_agents);
      h_pre.col(j) = w1.cwiseAbs() * q.col(j) + b1.col(j);
      for (int e = 0; e < embed; ++e) h(e, j) = elu(h_pre(e, j));
      qtot(0, j) = w2_raw.col(j).cwiseAbs().dot(h.col(j)) + b2(0, j);
    }
    if (cache) {
      cache->state = state;
      cache->q = q;
      cache->w1_raw = std::move(w1_raw);
      cache->b1 = std::move(b1);
      cache->w2_raw = std::move(w2_raw);
      cache->v_hidden = std::move(v_hidden);
      cache->h_pre = std::move(h_pre);
      cache->h = std::move(h);
    }
    return qtot;
  }

  // dqtot: 1 x B. Accumulates hypernetwork grads, returns dq (n_agents x B).
  Mat<S> backward(const Mat<S>& dqtot, const Cache& c) {
    const Eigen::Index batch = dqtot.cols();
    Mat<S> dq(n_agents, batch);
    Mat<S> dw1_raw(embed * n_agents, batch);
    Mat<S> db1(embed, batch);
    Mat<S> dw2_raw(embed, batch);
    for (Eigen::Index j = 0; j < batch; ++j) {
      const S g = dqtot(0, j);
      Eigen::Map<const Mat<S>> w1(c.w1_raw.col(j).data(), embed, n_agents);
      Mat<S> de = c.w2_raw.col(j).cwiseAbs() * g;  // embed x 1
      Mat<S> dh_pre(embed, 1);
      for (int e = 0; e < embed; ++e) {
        dh_pre(e, 0) = de(e, 0) * elu_grad(c.h_pre(e, j));
      }
      dq.col(j) = w1.cwiseAbs().transpose() * dh_pre;
      Mat<S> dw1 = dh_pre * c.q.col(j).transpose();  // embed x n_agents
      Eigen::Map<Mat<S>> dw1_col(dw1_raw.col(j).data(), embed, n_agents);
      dw1_col = dw1.cwiseProduct(w1.unaryExpr(
          [](S v) { return v >= S(0) ? S(1) : S(-1); }));
      db1.col(j) = dh_pre;
      dw2_raw.col(j) = (c.h.col(j) * g).cwiseProduct(c.w2_raw.col(j).unaryExpr(
          [](S v) { return v >= S(0) ? S(1) : S(-1); }));
    }
    hyper_w1.backward(c.state, dw1_raw);
    hyper_b1.backward(c.state, db1);
    hyper_w2.backward(c.state, dw2_raw);
    Mat<S> dv_hidden = hyper_v2.backward(c.v_hidden, dqtot);
    dv_hidden = dv_hidden.cwiseProduct(
        (c.v_hidden.array() > S(0)).template cast<S>().matrix());
    hyper_v1.backward(c.state, dv_hidden);
    return dq;
  }

  void zero_grad() {
    hyper_w1.zero_grad();
    hyper_b1.zero_grad();
    hyper_w2.zero_grad();
    hyper_v1.zero_grad();
    hyper_v2.zero_grad();
  }

  void collect(std::vector<ParamRef<S>>& out, const std::string& prefix) {
    hyper_w1.collect(out, prefix + ".hw1");
    hyper_b1.collect(out, prefix + ".hb1");
    hyper_w2.collect(out, prefix + ".hw2");
    hyper_v1.collect(out, prefix + ".hv1");
    hyper_v2.collect(out, prefix + ".hv2");
  }
};

// Shared per-agent Q-network plus the monotone mixer.
template <class S>
struct QmixModel {
  int n_agents = 0;
  int obs_dim = 0;
  int state_dim = 0;
  int n_actions = 3;
  int hidden = 256;
  int embed = 64;

  Mlp<S> agent;
  Mixer<S> mixer;

  void init(int agents, int obs_dimension, int state_dimension,
            int hidden_units, int embed_dim, std::uint64_t seed) {
    n_agents = agents;
    obs_dim = obs_dimension;
    state_dim = state_dimension;
    hidden = hidden_units;
    embed = embed_dim;
    Rng rng = Rng::substream(seed, 0, 0, StreamPurpose::kNetInit);
    agent.init({obs_dim, hidden, hidden, hidden, n_actions}, rng);
    mixer.init(n_agents, state_dim, embed, rng);
  }

  std::vector<ParamRef<S>> params() {
    std::vector<ParamRef<S>> out;
    agent.collect(out, "agent");
    mixer.collect(out, "mixer");
    return out;
  }

  void zero_grad() {
    agent.zero_grad();
    mixer.zero_grad();
  }

  void copy_from(QmixModel<S>& other) {
    auto dst = params();
    auto src = other.params();
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].value = *src[i].value;
  }
};

template <class S>
struct TdBatch {
  std::vector<Mat<S>> obs;       // per agent: obs_dim x B
  std::vector<Mat<S>> next_obs;  // per agent: obs_dim x B
  Mat<S> state;                  // state_dim x B
  Mat<S> next_state;
  Eigen::MatrixXi actions;       // n_agents x B
  Mat<S> reward;                 // 1 x B
  Mat<S> bootstrap_mask;         // 1 x B; 0 only at true environment terminals
};

// One-step TD objective: y = r + gamma * mask * Qtot_target(s', argmax-per-
// agent target Q). Returns the mean squared error; accumulates gradients on
// the online model when with_grad is set.
template <class S>
S td_loss(QmixModel<S>& online, const QmixModel<S>& target,
          const TdBatch<S>& batch, S gamma, bool with_grad) {
  const Eigen::Index bsz = batch.reward.cols();
  const int n = online.n_agents;

  Mat<S> qn(n, bsz);
  for (int i = 0; i < n; ++i) {
    Mat<S> q_i = target.agent.forward(batch.next_obs[i]);
    qn.row(i) = q_i.colwise().maxCoeff();
  }
  Mat<S> qtot_next = target.mixer.forward(qn, batch.next_state, nullptr);
  Mat<S> y = batch.reward +
             gamma * batch.bootstrap_mask.cwiseProduct(qtot_next);

  std::vector<typename Mlp<S>::Cache> caches(static_cast<std::size_t>(n));
  Mat<S> qsel(n, bsz);
  for (int i = 0; i < n; ++i) {
    Mat<S> q_i = online.agent.forward(batch.obs[i], &caches[i]);
    for (Eigen::Index j = 0; j < bsz; ++j) {
      qsel(i, j) = q_i(batch.actions(i, j), j);
    }
  }
  typename Mixer<S>::Cache mc;
  Mat<S> qtot = online.mixer.forward(qsel, batch.state, &mc);

  Mat<S> diff = qtot - y;
  S loss = diff.squaredNorm() / static_cast<S>(bsz);
  if (with_grad) {
    Mat<S> dqtot = diff * (S(2) / static_cast<S>(bsz));
    Mat<S> dqsel = online.mixer.backward(dqtot, mc);
    for (int i = 0; i < n; ++i) {
      Mat<S> dq_i = Mat<S>::Zero(online.n_actions, bsz);
      for (Eigen::Index j = 0; j < bsz; ++j) {
        dq_i(batch.actions(i, j), j) = dqsel(i, j);
      }
      online.agent.backward(dq_i, caches[i]);
    }
  }
  return loss;
}

template <class S>
struct Adam {
  S lr = S(1e-3);
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);
  S clip_norm = S(10);
  long step_count = 0;
  std::vector<Mat<S>> m, v;

  void init(const std::vector<ParamRef<S>>& params) {
    m.clear();
    v.clear();
    for (const auto& p : params) {
      m.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
      v.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
    }
    step_count = 0;
  }

  void step(std::vector<ParamRef<S>>& params) {
    S norm2 = S(0);
    for (const auto& p : params) norm2 += p.grad->squaredNorm();
    S norm = static_cast<S>(std::sqrt(static_cast<double>(norm2)));
    S scale = norm > clip_norm ? clip_norm / norm : S(1);
    ++step_count;
    const S bc1 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1),
                                                 static_cast<double>(step_count)));
    const S bc2 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2),
                                                 static_cast<double>(step_count)));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Mat<S> g = *params[i].grad * scale;
      m[i] = beta1 * m[i] + (S(1) - beta1) * g;
      v[i] = beta2 * v[i] + (S(1) - beta2) * g.cwiseProduct(g);
      Mat<S> mhat = m[i] / bc1;
      Mat<S> vhat = v[i] / bc2;
      params[i].value->array() -=
          lr * mhat.array() / (vhat.array().sqrt() + eps);
    }
  }
};

}  // namespace habcov::nets
