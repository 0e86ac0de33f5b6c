#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "habcov/environment.hpp"
#include "habcov/nets.hpp"

namespace habcov {

// Training math runs in float32; the templated network code is instantiated
// in double by the gradient-check tests.
using TrainScalar = float;

struct TrainConfig {
  double learning_rate = 1e-6;
  int batch_size = 128;
  double gamma = 0.99;
  double eps_start = 1.0;
  double eps_end = 0.05;
  long eps_decay_steps = 2000000;
  long target_update_interval = 2000;  // gradient steps between hard copies
  long total_env_steps = 0;
  long warmup_steps = 10000;
  int update_interval = 1;  // environment steps per gradient step
  long buffer_capacity = 1000000;
  int hidden_units = 256;
  int mixing_embed = 64;
  double grad_clip = 10.0;
  int eval_every_episodes = 50;
  int eval_episodes = 5;
  std::uint64_t master_seed = 1;

  void validate() const;
  std::map<std::string, std::string> to_kv() const;
  static TrainConfig from_kv(const std::map<std::string, std::string>& kv);
};

// Linear decay from eps_start to eps_end over eps_decay_steps, constant after.
double epsilon_at(const TrainConfig& cfg, long env_step);

// Ring buffer of flattened transitions with a seeded uniform sampler.
class ReplayBuffer {
 public:
  ReplayBuffer(int n_agents, int obs_dim, int state_dim, long capacity,
               std::uint64_t sampler_seed);

  void add(const std::vector<std::vector<double>>& obs,
           const std::vector<double>& state, const std::vector<Action>& actions,
           double reward, const std::vector<std::vector<double>>& next_obs,
           const std::vector<double>& next_state, bool terminal, bool timeout,
           int step_index);

  long size() const { return size_; }
  long capacity() const { return capacity_; }
  bool contains_step_index(int step_index) const;

  void sample(int batch_size, nets::TdBatch<TrainScalar>& out);

  Rng& sampler() { return sampler_; }

 private:
  int n_agents_, obs_dim_, state_dim_;
  long capacity_;
  long size_ = 0;
  long next_ = 0;
  std::vector<TrainScalar> obs_, next_obs_, state_, next_state_;
  std::vector<std::int8_t> actions_;
  std::vector<TrainScalar> reward_;
  std::vector<TrainScalar> bootstrap_;
  std::vector<std::int32_t> step_index_;
  Rng sampler_;
};

struct CurvePoint {
  long step = 0;
  long episodes = 0;
  double mean_reward = 0.0;
  double mean_group_twr = 0.0;
  double mean_separation_ratio = 0.0;
  double loss = 0.0;
  double epsilon = 0.0;
};

std::string curve_csv_header();
std::string curve_csv_row(const CurvePoint& p);

struct TrainResult {
  std::vector<CurvePoint> curve;
  long env_steps = 0;
  long episodes = 0;
  std::string checkpoint_path;
};

// CTDE learner: shared agent network, monotone mixer, target copies, Adam.
class QmixLearner {
 public:
  QmixLearner(const EnvConfig& env_cfg, const TrainConfig& train_cfg);

  static Action select_action(const nets::QmixModel<TrainScalar>& model,
                              const std::vector<double>& obs, double epsilon,
                              Rng& rng);
  std::vector<Action> select_actions(
      const std::vector<std::vector<double>>& obs, double epsilon,
      std::vector<Rng>& streams) const;
  std::vector<Action> greedy_actions(
      const std::vector<std::vector<double>>& obs) const;

  // One gradient step from a buffer sample. Throws if the buffer holds fewer
  // than batch_size records.
  double td_update();

  // Hard-copies the online parameters into the target networks.
  void sync_target();

  TrainResult train(const std::string& out_dir);

  // Greedy evaluation over held-out seeds; returns mean episode metrics and
  // optionally the traces.
  struct EvalSummary {
    double mean_reward = 0.0;
    double mean_group_twr = 0.0;
    double mean_separation_ratio = 0.0;
  };
  EvalSummary evaluate(const std::vector<std::uint64_t>& seeds,
                       std::vector<EpisodeTrace>* traces = nullptr) const;

  void save_checkpoint(const std::string& path) const;
  static std::unique_ptr<QmixLearner> load_checkpoint(const std::string& path);
  // Validates that a checkpoint matches the given environment dimensions.
  static std::unique_ptr<QmixLearner> load_checkpoint(
      const std::string& path, const EnvConfig& expect_env);

  const EnvConfig& env_config() const { return env_cfg_; }
  const TrainConfig& train_config() const { return train_cfg_; }
  nets::QmixModel<TrainScalar>& model() { return model_; }
  nets::QmixModel<TrainScalar>& target_model() { return target_; }
  ReplayBuffer& buffer() { return *buffer_; }
  long env_steps() const { return env_steps_; }
  long gradient_steps() const { return gradient_steps_; }
  long episodes_done() const { return episodes_; }

 private:
  EnvConfig env_cfg_;
  TrainConfig train_cfg_;
  nets::QmixModel<TrainScalar> model_;
  nets::QmixModel<TrainScalar> target_;
  nets::Adam<TrainScalar> optimizer_;
  std::unique_ptr<ReplayBuffer> buffer_;
  long env_steps_ = 0;
  long gradient_steps_ = 0;
  long episodes_ = 0;
  double last_loss_ = 0.0;

  friend std::unique_ptr<QmixLearner> load_checkpoint_impl(const std::string&);
};

// Scripted uniform-random policy over the same action space; the comparison
// oracle for the desk-scale learning check.
EpisodeTrace run_random_policy_episode(const EnvConfig& cfg,
                                       std::uint64_t seed);

// Greedy policy rollout for a trained model.
EpisodeTrace run_greedy_episode(const nets::QmixModel<TrainScalar>& model,
                                const EnvConfig& cfg, std::uint64_t seed);

}  // namespace habcov
