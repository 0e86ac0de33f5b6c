#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "habcov/qmix.hpp"

using namespace habcov;
namespace fs = std::filesystem;

namespace {

EnvConfig tiny_env(int n_agents = 2, int n_levels = 3) {
  EnvConfig cfg;
  cfg.n_agents = n_agents;
  cfg.n_levels = n_levels;
  cfg.episode_steps = 8;
  cfg.wind.truth = "compass";
  return cfg;
}

TrainConfig tiny_train() {
  TrainConfig cfg;
  cfg.hidden_units = 32;
  cfg.mixing_embed = 16;
  cfg.batch_size = 8;
  cfg.buffer_capacity = 256;
  cfg.warmup_steps = 0;
  cfg.eval_every_episodes = 0;
  cfg.eval_episodes = 2;
  cfg.master_seed = 5;
  return cfg;
}

template <class S>
nets::Mat<S> random_mat(int rows, int cols, Rng& rng, double scale = 1.0) {
  nets::Mat<S> m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = static_cast<S>(rng.uniform(-scale, scale));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("epsilon schedule endpoints and linearity") {
  TrainConfig cfg;
  CHECK(epsilon_at(cfg, 0) == 1.0);
  CHECK(epsilon_at(cfg, 2000000) == 0.05);
  CHECK(epsilon_at(cfg, 5000000) == 0.05);
  CHECK(epsilon_at(cfg, 1000000) == doctest::Approx(0.525));
}

TEST_CASE("pure exploration draws all actions uniformly") {
  QmixLearner learner(tiny_env(), tiny_train());
  Rng rng(3);
  std::vector<double> obs(static_cast<std::size_t>(tiny_env().obs_dim()), 0.5);
  int counts[3] = {0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    counts[static_cast<int>(
        QmixLearner::select_action(learner.model(), obs, 1.0, rng))]++;
  }
  // Chi-squared against uniform, 2 dof; 13.8 is far beyond the 99th pct.
  double chi2 = 0.0;
  for (int c : counts) {
    double e = n / 3.0;
    chi2 += (c - e) * (c - e) / e;
  }
  CHECK(chi2 < 13.8);
}

TEST_CASE("greedy selection takes the argmax with lowest-index ties") {
  nets::QmixModel<TrainScalar> model;
  model.init(2, 3, 10, 4, 4, 1);
  // Overwrite the output layer so Q = b exactly for a zero observation.
  auto& out = model.agent.layers.back();
  out.w.setZero();
  for (auto& layer : model.agent.layers) layer.w.setZero(), layer.b.setZero();
  std::vector<double> obs(3, 0.0);
  Rng rng(1);

  out.b(0, 0) = 0.2f;
  out.b(1, 0) = 0.9f;
  out.b(2, 0) = 0.1f;
  CHECK(QmixLearner::select_action(model, obs, 0.0, rng) == Action::kMaintain);

  out.b(0, 0) = 0.5f;
  out.b(1, 0) = 0.5f;
  out.b(2, 0) = 0.1f;
  CHECK(QmixLearner::select_action(model, obs, 0.0, rng) == Action::kAscend);
}

TEST_CASE("mixer is monotone in every agent value") {
  nets::QmixModel<double> model;
  model.init(3, 4, 12, 8, 16, 9);
  Rng rng(2);
  for (int probe = 0; probe < 2000; ++probe) {
    nets::Mat<double> q = random_mat<double>(3, 1, rng, 5.0);
    nets::Mat<double> s = random_mat<double>(12, 1, rng, 1.0);
    double base = model.mixer.forward(q, s, nullptr)(0, 0);
    for (int i = 0; i < 3; ++i) {
      nets::Mat<double> q2 = q;
      const double h = 1e-4;
      q2(i, 0) += h;
      double up = model.mixer.forward(q2, s, nullptr)(0, 0);
      CHECK((up - base) / h >= -1e-6);
    }
  }

  // Raising one agent's value never lowers the total.
  nets::Mat<double> q(3, 1), s = random_mat<double>(12, 1, rng, 1.0);
  q << 1.0, 1.0, 1.0;
  double v1 = model.mixer.forward(q, s, nullptr)(0, 0);
  q(2, 0) = 2.0;
  double v2 = model.mixer.forward(q, s, nullptr)(0, 0);
  CHECK(v2 >= v1);
}

TEST_CASE("zeroed hypernetworks collapse the mixer to zero") {
  nets::QmixModel<double> model;
  model.init(3, 4, 12, 8, 16, 9);
  for (auto& p : model.params()) {
    if (p.name.rfind("mixer.", 0) == 0) p.value->setZero();
  }
  Rng rng(5);
  for (int probe = 0; probe < 20; ++probe) {
    nets::Mat<double> q = random_mat<double>(3, 1, rng, 5.0);
    nets::Mat<double> s = random_mat<double>(12, 1, rng, 1.0);
    CHECK(model.mixer.forward(q, s, nullptr)(0, 0) == 0.0);
  }
}

TEST_CASE("IGM: joint argmax of Qtot equals per-agent argmaxes") {
  Rng rng(8);
  for (int n : {2, 3, 4}) {
    for (int trial = 0; trial < 20; ++trial) {
      nets::QmixModel<double> model;
      model.init(n, 6, 10, 12, 8,
                 static_cast<std::uint64_t>(100 * n + trial));
      std::vector<nets::Mat<double>> obs;
      for (int i = 0; i < n; ++i) obs.push_back(random_mat<double>(6, 1, rng));
      nets::Mat<double> state = random_mat<double>(10, 1, rng);

      std::vector<nets::Mat<double>> qvals;
      std::vector<int> greedy;
      for (int i = 0; i < n; ++i) {
        qvals.push_back(model.agent.forward(obs[i]));
        int best = 0;
        for (int a = 1; a < 3; ++a) {
          if (qvals[i](a, 0) > qvals[i](best, 0)) best = a;
        }
        greedy.push_back(best);
      }

      int n_joint = 1;
      for (int i = 0; i < n; ++i) n_joint *= 3;
      double best_val = -1e300;
      std::vector<int> best_joint;
      for (int code = 0; code < n_joint; ++code) {
        nets::Mat<double> q(n, 1);
        int c = code;
        std::vector<int> joint;
        for (int i = 0; i < n; ++i) {
          int a = c % 3;
          c /= 3;
          joint.push_back(a);
          q(i, 0) = qvals[i](a, 0);
        }
        double v = model.mixer.forward(q, state, nullptr)(0, 0);
        if (v > best_val) {
          best_val = v;
          best_joint = joint;
        }
      }
      CHECK(best_joint == greedy);
    }
  }
}

TEST_CASE("analytic td gradients match central finite differences") {
  // Toy instance: 2 agents, 8-dim observations, double precision.
  const int n = 2, obs_dim = 8, state_dim = 10, batch = 6;
  nets::QmixModel<double> model, target;
  model.init(n, obs_dim, state_dim, 12, 8, 3);
  target.init(n, obs_dim, state_dim, 12, 8, 4);

  Rng rng(12);
  nets::TdBatch<double> data;
  for (int i = 0; i < n; ++i) {
    data.obs.push_back(random_mat<double>(obs_dim, batch, rng));
    data.next_obs.push_back(random_mat<double>(obs_dim, batch, rng));
  }
  data.state = random_mat<double>(state_dim, batch, rng);
  data.next_state = random_mat<double>(state_dim, batch, rng);
  data.actions.resize(n, batch);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < batch; ++j) {
      data.actions(i, j) = static_cast<int>(rng.uniform_int(3));
    }
  }
  data.reward = random_mat<double>(1, batch, rng, 3.0);
  data.bootstrap_mask = nets::Mat<double>::Ones(1, batch);

  model.zero_grad();
  nets::td_loss(model, target, data, 0.97, true);

  double max_rel = 0.0;
  for (auto& p : model.params()) {
    for (Eigen::Index k = 0; k < p.value->size(); ++k) {
      const double h = 1e-5;
      double saved = (*p.value)(k);
      (*p.value)(k) = saved + h;
      double up = nets::td_loss(model, target, data, 0.97, false);
      (*p.value)(k) = saved - h;
      double down = nets::td_loss(model, target, data, 0.97, false);
      (*p.value)(k) = saved;
      double numeric = (up - down) / (2.0 * h);
      double analytic = (*p.grad)(k);
      double rel = std::abs(analytic - numeric) /
                   std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      max_rel = std::max(max_rel, rel);
    }
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("a constant-output model with zero gamma reaches zero loss") {
  const int n = 2, obs_dim = 4, state_dim = 6;
  nets::QmixModel<double> model, target;
  model.init(n, obs_dim, state_dim, 8, 8, 3);
  target.init(n, obs_dim, state_dim, 8, 8, 3);
  // Zero the mixer hypernets, then pin the scalar-bias output at 13.
  for (auto& p : model.params()) {
    if (p.name.rfind("mixer.", 0) == 0) p.value->setZero();
  }
  model.mixer.hyper_v2.b(0, 0) = 13.0;

  Rng rng(6);
  nets::TdBatch<double> data;
  for (int i = 0; i < n; ++i) {
    data.obs.push_back(random_mat<double>(obs_dim, 4, rng));
    data.next_obs.push_back(random_mat<double>(obs_dim, 4, rng));
  }
  data.state = random_mat<double>(state_dim, 4, rng);
  data.next_state = random_mat<double>(state_dim, 4, rng);
  data.actions = Eigen::MatrixXi::Zero(n, 4);
  data.reward = nets::Mat<double>::Constant(1, 4, 13.0);
  data.bootstrap_mask = nets::Mat<double>::Ones(1, 4);
  CHECK(nets::td_loss(model, target, data, 0.0, false) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("repeated updates on one transition drive the loss down") {
  EnvConfig env_cfg = tiny_env();
  TrainConfig train_cfg = tiny_train();
  train_cfg.learning_rate = 1e-3;
  train_cfg.batch_size = 4;
  QmixLearner learner(env_cfg, train_cfg);

  Environment env(env_cfg);
  auto rr = env.reset(3);
  std::vector<Action> joint(env_cfg.n_agents, Action::kMaintain);
  StepResult sr = env.step(joint);
  learner.buffer().add(rr.observations, rr.state, joint, sr.reward,
                       sr.observations, sr.state, sr.done, sr.done, 1);
  learner.buffer().add(rr.observations, rr.state, joint, sr.reward,
                       sr.observations, sr.state, sr.done, sr.done, 1);
  learner.buffer().add(rr.observations, rr.state, joint, sr.reward,
                       sr.observations, sr.state, sr.done, sr.done, 1);
  learner.buffer().add(rr.observations, rr.state, joint, sr.reward,
                       sr.observations, sr.state, sr.done, sr.done, 1);

  double first = learner.td_update();
  double last = first;
  for (int i = 0; i < 400; ++i) last = learner.td_update();
  CHECK(last < first * 0.05);
}

TEST_CASE("replay buffer evicts the oldest records at capacity") {
  ReplayBuffer buffer(1, 2, 2, 10, 1);
  std::vector<std::vector<double>> obs = {{0.0, 0.0}};
  std::vector<double> state = {0.0, 0.0};
  std::vector<Action> act = {Action::kMaintain};
  for (int i = 0; i < 15; ++i) {
    buffer.add(obs, state, act, 0.0, obs, state, false, false, i);
  }
  CHECK(buffer.size() == 10);
  for (int i = 0; i < 5; ++i) CHECK_FALSE(buffer.contains_step_index(i));
  for (int i = 5; i < 15; ++i) CHECK(buffer.contains_step_index(i));

  nets::TdBatch<TrainScalar> batch;
  CHECK_THROWS_AS(buffer.sample(11, batch), std::logic_error);
}

TEST_CASE("buffer sampling is deterministic under the seed") {
  auto fill = [](ReplayBuffer& b) {
    std::vector<std::vector<double>> obs = {{0.0, 0.0}};
    std::vector<double> state = {0.0, 0.0};
    std::vector<Action> act = {Action::kAscend};
    for (int i = 0; i < 30; ++i) {
      obs[0][0] = i;
      b.add(obs, state, act, i, obs, state, false, false, i);
    }
  };
  ReplayBuffer a(1, 2, 2, 100, 7), b(1, 2, 2, 100, 7);
  fill(a);
  fill(b);
  nets::TdBatch<TrainScalar> ba, bb;
  a.sample(8, ba);
  b.sample(8, bb);
  CHECK((ba.reward - bb.reward).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("checkpoint round-trip preserves greedy actions bit-exactly") {
  EnvConfig env_cfg = tiny_env(3, 4);
  TrainConfig train_cfg = tiny_train();
  QmixLearner learner(env_cfg, train_cfg);

  Environment env(env_cfg);
  auto rr = env.reset(11);
  fs::path p = fs::temp_directory_path() / "habcov_ckpt.bin";
  learner.save_checkpoint(p.string());
  auto loaded = QmixLearner::load_checkpoint(p.string());

  auto a1 = learner.greedy_actions(rr.observations);
  auto a2 = loaded->greedy_actions(rr.observations);
  CHECK(a1 == a2);

  // Q values themselves must match bit-for-bit.
  nets::Mat<TrainScalar> x(env_cfg.obs_dim(), 1);
  for (int k = 0; k < env_cfg.obs_dim(); ++k) {
    x(k, 0) = static_cast<TrainScalar>(rr.observations[0][k]);
  }
  nets::Mat<TrainScalar> q1 = learner.model().agent.forward(x);
  nets::Mat<TrainScalar> q2 = loaded->model().agent.forward(x);
  CHECK((q1 - q2).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("checkpoint dimension mismatch is reported with both shapes") {
  QmixLearner learner(tiny_env(2, 3), tiny_train());
  fs::path p = fs::temp_directory_path() / "habcov_ckpt_dim.bin";
  learner.save_checkpoint(p.string());
  EnvConfig other = tiny_env(3, 3);
  CHECK_THROWS_WITH_AS(QmixLearner::load_checkpoint(p.string(), other),
                       doctest::Contains("n_agents=2"), std::runtime_error);
}

TEST_CASE("zero training steps yield an empty curve and a checkpoint") {
  EnvConfig env_cfg = tiny_env();
  TrainConfig train_cfg = tiny_train();
  train_cfg.total_env_steps = 0;
  QmixLearner learner(env_cfg, train_cfg);
  fs::path dir = fs::temp_directory_path() / "habcov_train_zero";
  fs::remove_all(dir);
  TrainResult r = learner.train(dir.string());
  CHECK(r.curve.empty());
  CHECK(fs::exists(r.checkpoint_path));
}

TEST_CASE("training is deterministic under the master seed") {
  fs::path d1 = fs::temp_directory_path() / "habcov_train_a";
  fs::path d2 = fs::temp_directory_path() / "habcov_train_b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  EnvConfig env_cfg = tiny_env();
  TrainConfig train_cfg = tiny_train();
  train_cfg.total_env_steps = 64;
  train_cfg.update_interval = 4;
  train_cfg.eval_every_episodes = 4;
  train_cfg.learning_rate = 1e-4;

  QmixLearner l1(env_cfg, train_cfg);
  QmixLearner l2(env_cfg, train_cfg);
  l1.train(d1.string());
  l2.train(d2.string());

  std::ifstream f1(d1 / "curve.csv"), f2(d2 / "curve.csv");
  std::string s1((std::istreambuf_iterator<char>(f1)),
                 std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)),
                 std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK_FALSE(s1.empty());
}
