#include "habcov/qmix.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "habcov/metrics.hpp"

namespace habcov {

namespace {

constexpr std::uint64_t kTrainEpisodeTag = 0x5EED;
constexpr std::uint64_t kEvalSeedTag = 0xE7A1;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                          std::uint64_t idx) {
  return mix_key(mix_key(splitmix64(master), tag), idx);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0, 1)");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (eps_start < 0.0 || eps_start > 1.0 || eps_end < 0.0 || eps_end > 1.0) {
    throw std::invalid_argument("epsilon bounds must be in [0, 1]");
  }
  if (eps_decay_steps < 1) throw std::invalid_argument("eps_decay_steps must be >= 1");
  if (update_interval < 1) throw std::invalid_argument("update_interval must be >= 1");
  if (buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be >= 1");
  if (hidden_units < 1 || mixing_embed < 1) {
    throw std::invalid_argument("network sizes must be positive");
  }
}

std::map<std::string, std::string> TrainConfig::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["train.lr"] = fmt(learning_rate);
  kv["train.batch"] = std::to_string(batch_size);
  kv["train.gamma"] = fmt(gamma);
  kv["train.eps_start"] = fmt(eps_start);
  kv["train.eps_end"] = fmt(eps_end);
  kv["train.eps_decay_steps"] = std::to_string(eps_decay_steps);
  kv["train.target_interval"] = std::to_string(target_update_interval);
  kv["train.total_steps"] = std::to_string(total_env_steps);
  kv["train.warmup"] = std::to_string(warmup_steps);
  kv["train.update_interval"] = std::to_string(update_interval);
  kv["train.buffer"] = std::to_string(buffer_capacity);
  kv["train.hidden"] = std::to_string(hidden_units);
  kv["train.embed"] = std::to_string(mixing_embed);
  kv["train.grad_clip"] = fmt(grad_clip);
  kv["train.eval_every"] = std::to_string(eval_every_episodes);
  kv["train.eval_episodes"] = std::to_string(eval_episodes);
  kv["train.seed"] = std::to_string(master_seed);
  return kv;
}

TrainConfig TrainConfig::from_kv(const std::map<std::string, std::string>& kv) {
  TrainConfig c;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("train.lr")) c.learning_rate = std::stod(*v);
  if (auto* v = get("train.batch")) c.batch_size = std::stoi(*v);
  if (auto* v = get("train.gamma")) c.gamma = std::stod(*v);
  if (auto* v = get("train.eps_start")) c.eps_start = std::stod(*v);
  if (auto* v = get("train.eps_end")) c.eps_end = std::stod(*v);
  if (auto* v = get("train.eps_decay_steps")) c.eps_decay_steps = std::stol(*v);
  if (auto* v = get("train.target_interval")) c.target_update_interval = std::stol(*v);
  if (auto* v = get("train.total_steps")) c.total_env_steps = std::stol(*v);
  if (auto* v = get("train.warmup")) c.warmup_steps = std::stol(*v);
  if (auto* v = get("train.update_interval")) c.update_interval = std::stoi(*v);
  if (auto* v = get("train.buffer")) c.buffer_capacity = std::stol(*v);
  if (auto* v = get("train.hidden")) c.hidden_units = std::stoi(*v);
  if (auto* v = get("train.embed")) c.mixing_embed = std::stoi(*v);
  if (auto* v = get("train.grad_clip")) c.grad_clip = std::stod(*v);
  if (auto* v = get("train.eval_every")) c.eval_every_episodes = std::stoi(*v);
  if (auto* v = get("train.eval_episodes")) c.eval_episodes = std::stoi(*v);
  if (auto* v = get("train.seed")) c.master_seed = std::stoull(*v);
  return c;
}

double epsilon_at(const TrainConfig& cfg, long env_step) {
  if (env_step >= cfg.eps_decay_steps) return cfg.eps_end;
  double frac = static_cast<double>(env_step) / static_cast<double>(cfg.eps_decay_steps);
  return cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start);
}

ReplayBuffer::ReplayBuffer(int n_agents, int obs_dim, int state_dim,
                           long capacity, std::uint64_t sampler_seed)
    : n_agents_(n_agents),
      obs_dim_(obs_dim),
      state_dim_(state_dim),
      capacity_(capacity),
      sampler_(Rng::substream(sampler_seed, 0, 0, StreamPurpose::kSampler)) {}

void ReplayBuffer::add(const std::vector<std::vector<double>>& obs,
                       const std::vector<double>& state,
                       const std::vector<Action>& actions, double reward,
                       const std::vector<std::vector<double>>& next_obs,
                       const std::vector<double>& next_state, bool terminal,
                       bool timeout, int step_index) {
  const std::size_t obs_rec = static_cast<std::size_t>(n_agents_) * obs_dim_;
  const std::size_t st_rec = static_cast<std::size_t>(state_dim_);
  if (size_ < capacity_) {
    obs_.resize(obs_.size() + obs_rec);
    next_obs_.resize(next_obs_.size() + obs_rec);
    state_.resize(state_.size() + st_rec);
    next_state_.resize(next_state_.size() + st_rec);
    actions_.resize(actions_.size() + n_agents_);
    reward_.push_back(0);
    bootstrap_.push_back(0);
    step_index_.push_back(0);
    ++size_;
  }
  const long slot = next_;
  next_ = (next_ + 1) % capacity_;
  auto* o = &obs_[slot * obs_rec];
  auto* no = &next_obs_[slot * obs_rec];
  for (int i = 0; i < n_agents_; ++i) {
    for (int k = 0; k < obs_dim_; ++k) {
      o[i * obs_dim_ + k] = static_cast<TrainScalar>(obs[i][k]);
      no[i * obs_dim_ + k] = static_cast<TrainScalar>(next_obs[i][k]);
    }
  }
  for (int k = 0; k < state_dim_; ++k) {
    state_[slot * st_rec + k] = static_cast<TrainScalar>(state[k]);
    next_state_[slot * st_rec + k] = static_cast<TrainScalar>(next_state[k]);
  }
  for (int i = 0; i < n_agents_; ++i) {
    actions_[slot * n_agents_ + i] = static_cast<std::int8_t>(actions[i]);
  }
  reward_[slot] = static_cast<TrainScalar>(reward);
  bootstrap_[slot] = (terminal && !timeout) ? TrainScalar(0) : TrainScalar(1);
  step_index_[slot] = step_index;
}

bool ReplayBuffer::contains_step_index(int step_index) const {
  return std::find(step_index_.begin(), step_index_.end(), step_index) !=
         step_index_.end();
}

void ReplayBuffer::sample(int batch_size, nets::TdBatch<TrainScalar>& out) {
  if (size_ < batch_size) {
    throw std::logic_error("replay buffer holds fewer records than batch_size");
  }
  const std::size_t obs_rec = static_cast<std::size_t>(n_agents_) * obs_dim_;
  out.obs.assign(n_agents_, nets::Mat<TrainScalar>(obs_dim_, batch_size));
  out.next_obs.assign(n_agents_, nets::Mat<TrainScalar>(obs_dim_, batch_size));
  out.state.resize(state_dim_, batch_size);
  out.next_state.resize(state_dim_, batch_size);
  out.actions.resize(n_agents_, batch_size);
  out.reward.resize(1, batch_size);
  out.bootstrap_mask.resize(1, batch_size);
  for (int j = 0; j < batch_size; ++j) {
    const long idx = static_cast<long>(sampler_.uniform_int(
        static_cast<std::uint64_t>(size_)));
    for (int i = 0; i < n_agents_; ++i) {
      for (int k = 0; k < obs_dim_; ++k) {
        out.obs[i](k, j) = obs_[idx * obs_rec + i * obs_dim_ + k];
        out.next_obs[i](k, j) = next_obs_[idx * obs_rec + i * obs_dim_ + k];
      }
      out.actions(i, j) = actions_[idx * n_agents_ + i];
    }
    for (int k = 0; k < state_dim_; ++k) {
      out.state(k, j) = state_[idx * state_dim_ + k];
      out.next_state(k, j) = next_state_[idx * state_dim_ + k];
    }
    out.reward(0, j) = reward_[idx];
    out.bootstrap_mask(0, j) = bootstrap_[idx];
  }
}

std::string curve_csv_header() {
  return "step,episodes,mean_reward,mean_group_twr,mean_separation_ratio,loss,epsilon";
}

std::string curve_csv_row(const CurvePoint& p) {
  std::ostringstream os;
  os.precision(17);
  os << p.step << ',' << p.episodes << ',' << p.mean_reward << ','
     << p.mean_group_twr << ',' << p.mean_separation_ratio << ',' << p.loss
     << ',' << p.epsilon;
  return os.str();
}

QmixLearner::QmixLearner(const EnvConfig& env_cfg, const TrainConfig& train_cfg)
    : env_cfg_(env_cfg), train_cfg_(train_cfg) {
  env_cfg_.validate();
  train_cfg_.validate();
  model_.init(env_cfg_.n_agents, env_cfg_.obs_dim(), env_cfg_.state_dim(),
              train_cfg_.hidden_units, train_cfg_.mixing_embed,
              train_cfg_.master_seed);
  target_.init(env_cfg_.n_agents, env_cfg_.obs_dim(), env_cfg_.state_dim(),
               train_cfg_.hidden_units, train_cfg_.mixing_embed,
               train_cfg_.master_seed);
  target_.copy_from(model_);
  optimizer_.lr = static_cast<TrainScalar>(train_cfg_.learning_rate);
  optimizer_.clip_norm = static_cast<TrainScalar>(train_cfg_.grad_clip);
  auto params = model_.params();
  optimizer_.init(params);
  buffer_ = std::make_unique<ReplayBuffer>(
      env_cfg_.n_agents, env_cfg_.obs_dim(), env_cfg_.state_dim(),
      train_cfg_.buffer_capacity, train_cfg_.master_seed);
}

Action QmixLearner::select_action(const nets::QmixModel<TrainScalar>& model,
                                  const std::vector<double>& obs,
                                  double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<Action>(rng.uniform_int(kNumActions));
  }
  nets::Mat<TrainScalar> x(obs.size(), 1);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    x(static_cast<Eigen::Index>(k), 0) = static_cast<TrainScalar>(obs[k]);
  }
  nets::Mat<TrainScalar> q = model.agent.forward(x);
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.rows()); ++a) {
    if (q(a, 0) > q(best, 0)) best = a;  // ties keep the lowest index
  }
  return static_cast<Action>(best);
}

std::vector<Action> QmixLearner::select_actions(
    const std::vector<std::vector<double>>& obs, double epsilon,
    std::vector<Rng>& streams) const {
  std::vector<Action> actions;
  actions.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    actions.push_back(select_action(model_, obs[i], epsilon, streams[i]));
  }
  return actions;
}

std::vector<Action> QmixLearner::greedy_actions(
    const std::vector<std::vector<double>>& obs) const {
  Rng unused(0);
  std::vector<Action> actions;
  actions.reserve(obs.size());
  for (const auto& o : obs) {
    actions.push_back(select_action(model_, o, 0.0, unused));
  }
  return actions;
}

double QmixLearner::td_update() {
  nets::TdBatch<TrainScalar> batch;
  buffer_->sample(train_cfg_.batch_size, batch);
  model_.zero_grad();
  TrainScalar loss =
      nets::td_loss(model_, target_, batch,
                    static_cast<TrainScalar>(train_cfg_.gamma), true);
  auto params = model_.params();
  optimizer_.step(params);
  ++gradient_steps_;
  if (gradient_steps_ % train_cfg_.target_update_interval == 0) sync_target();
  last_loss_ = static_cast<double>(loss);
  return last_loss_;
}

void QmixLearner::sync_target() { target_.copy_from(model_); }

QmixLearner::EvalSummary QmixLearner::evaluate(
    const std::vector<std::uint64_t>& seeds,
    std::vector<EpisodeTrace>* traces) const {
  EvalSummary s;
  for (std::uint64_t seed : seeds) {
    EpisodeTrace tr = run_greedy_episode(model_, env_cfg_, seed);
    s.mean_reward += tr.episode_return();
    s.mean_group_twr += compute_twr(tr, env_cfg_.r_coverage_km).group;
    s.mean_separation_ratio +=
        compute_separation(tr, SeparationNorm::kTrain, env_cfg_.r_coverage_km);
    if (traces) traces->push_back(std::move(tr));
  }
  const double n = static_cast<double>(seeds.size());
  s.mean_reward /= n;
  s.mean_group_twr /= n;
  s.mean_separation_ratio /= n;
  return s;
}

TrainResult QmixLearner::train(const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string curve_path = out_dir + "/curve.csv";
  const bool append = fs::exists(curve_path) && fs::file_size(curve_path) > 0;
  std::ofstream curve(curve_path, append ? std::ios::app : std::ios::out);
  if (!append) curve << curve_csv_header() << '\n';

  TrainResult result;
  std::vector<std::uint64_t> eval_seeds;
  for (int i = 0; i < train_cfg_.eval_episodes; ++i) {
    eval_seeds.push_back(derive_seed(train_cfg_.master_seed, kEvalSeedTag,
                                     static_cast<std::uint64_t>(i)));
  }
  auto emit_eval = [&]() {
    EvalSummary s = evaluate(eval_seeds);
    CurvePoint p{env_steps_,       episodes_,
                 s.mean_reward,    s.mean_group_twr,
                 s.mean_separation_ratio,
                 last_loss_,       epsilon_at(train_cfg_, env_steps_)};
    result.curve.push_back(p);
    curve << curve_csv_row(p) << '\n';
    curve.flush();
  };

  Environment env(env_cfg_);
  while (env_steps_ < train_cfg_.total_env_steps) {
    const std::uint64_t ep_seed = derive_seed(
        train_cfg_.master_seed, kTrainEpisodeTag,
        static_cast<std::uint64_t>(episodes_));
    auto rr = env.reset(ep_seed);
    std::vector<std::vector<double>> obs = std::move(rr.observations);
    std::vector<double> state = std::move(rr.state);
    std::vector<Rng> explore;
    for (int i = 0; i < env_cfg_.n_agents; ++i) {
      explore.push_back(Rng::substream(ep_seed, static_cast<std::uint64_t>(i),
                                       0, StreamPurpose::kExplore));
    }
    bool done = false;
    while (!done && env_steps_ < train_cfg_.total_env_steps) {
      const double eps = epsilon_at(train_cfg_, env_steps_);
      std::vector<Action> actions = select_actions(obs, eps, explore);
      StepResult sr = env.step(actions);
      buffer_->add(obs, state, actions, sr.reward, sr.observations, sr.state,
                   sr.done, sr.done || sr.truncated, env.t());
      ++env_steps_;
      obs = std::move(sr.observations);
      state = std::move(sr.state);
      done = sr.done;
      if (env_steps_ >= train_cfg_.warmup_steps &&
          buffer_->size() >= train_cfg_.batch_size &&
          env_steps_ % train_cfg_.update_interval == 0) {
        td_update();
      }
    }
    if (done) {
      ++episodes_;
      if (train_cfg_.eval_every_episodes > 0 &&
          episodes_ % train_cfg_.eval_every_episodes == 0) {
        emit_eval();
      }
    }
  }
  if (train_cfg_.total_env_steps > 0) emit_eval();

  result.env_steps = env_steps_;
  result.episodes = episodes_;
  result.checkpoint_path = out_dir + "/checkpoint.bin";
  save_checkpoint(result.checkpoint_path);
  return result;
}

namespace {

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_tensor(std::ostream& os, const std::string& name,
                  const nets::Mat<TrainScalar>& m) {
  write_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(os, static_cast<std::uint32_t>(m.rows()));
  write_u32(os, static_cast<std::uint32_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(TrainScalar) * m.size()));
}

void read_tensor(std::istream& is, const std::string& expect_name,
                 nets::Mat<TrainScalar>& m) {
  std::uint32_t name_len = read_u32(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  if (name != expect_name) {
    throw std::runtime_error("checkpoint tensor order mismatch: expected '" +
                             expect_name + "', found '" + name + "'");
  }
  std::uint32_t rows = read_u32(is), cols = read_u32(is);
  if (static_cast<Eigen::Index>(rows) != m.rows() ||
      static_cast<Eigen::Index>(cols) != m.cols()) {
    throw std::runtime_error("checkpoint tensor '" + name + "' has shape " +
                             std::to_string(rows) + "x" + std::to_string(cols) +
                             ", expected " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
  }
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(TrainScalar) * m.size()));
}

constexpr char kCkptMagic[8] = {'H', 'A', 'B', 'Q', 'M', 'I', 'X', '1'};

}  // namespace

void QmixLearner::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
  os.write(kCkptMagic, sizeof(kCkptMagic));

  std::map<std::string, std::string> kv = env_cfg_.to_kv();
  auto train_kv = train_cfg_.to_kv();
  kv.insert(train_kv.begin(), train_kv.end());
  kv["ckpt.env_steps"] = std::to_string(env_steps_);
  kv["ckpt.gradient_steps"] = std::to_string(gradient_steps_);
  kv["ckpt.episodes"] = std::to_string(episodes_);
  kv["ckpt.adam_steps"] = std::to_string(optimizer_.step_count);
  kv["ckpt.sampler"] = buffer_->sampler().serialize();
  std::ostringstream header;
  for (const auto& [k, v] : kv) header << k << '=' << v << '\n';
  const std::string header_str = header.str();
  write_u64(os, header_str.size());
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  auto& self = const_cast<QmixLearner&>(*this);
  auto online = self.model_.params();
  auto target = self.target_.params();
  write_u64(os, online.size() * 2 + self.optimizer_.m.size() * 2);
  for (const auto& p : online) write_tensor(os, p.name, *p.value);
  for (const auto& p : target) write_tensor(os, "target." + p.name, *p.value);
  for (std::size_t i = 0; i < self.optimizer_.m.size(); ++i) {
    write_tensor(os, "adam.m." + online[i].name, self.optimizer_.m[i]);
  }
  for (std::size_t i = 0; i < self.optimizer_.v.size(); ++i) {
    write_tensor(os, "adam.v." + online[i].name, self.optimizer_.v[i]);
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

std::unique_ptr<QmixLearner> QmixLearner::load_checkpoint(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a habcov checkpoint: " + path);
  }
  std::uint64_t header_len = read_u64(is);
  std::string header(header_len, '\0');
  is.read(header.data(), static_cast<std::streamsize>(header_len));
  std::map<std::string, std::string> kv;
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) {
    std::size_t eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  EnvConfig env_cfg = EnvConfig::from_kv(kv);
  TrainConfig train_cfg = TrainConfig::from_kv(kv);
  auto learner = std::make_unique<QmixLearner>(env_cfg, train_cfg);
  learner->env_steps_ = std::stol(kv.at("ckpt.env_steps"));
  learner->gradient_steps_ = std::stol(kv.at("ckpt.gradient_steps"));
  learner->episodes_ = std::stol(kv.at("ckpt.episodes"));
  learner->optimizer_.step_count = std::stol(kv.at("ckpt.adam_steps"));
  learner->buffer_->sampler().deserialize(kv.at("ckpt.sampler"));

  std::uint64_t n_tensors = read_u64(is);
  auto online = learner->model_.params();
  auto target = learner->target_.params();
  if (n_tensors != online.size() * 2 + learner->optimizer_.m.size() * 2) {
    throw std::runtime_error("checkpoint tensor count mismatch");
  }
  for (auto& p : online) read_tensor(is, p.name, *p.value);
  for (auto& p : target) read_tensor(is, "target." + p.name, *p.value);
  for (std::size_t i = 0; i < learner->optimizer_.m.size(); ++i) {
    read_tensor(is, "adam.m." + online[i].name, learner->optimizer_.m[i]);
  }
  for (std::size_t i = 0; i < learner->optimizer_.v.size(); ++i) {
    read_tensor(is, "adam.v." + online[i].name, learner->optimizer_.v[i]);
  }
  if (!is) throw std::runtime_error("checkpoint truncated: " + path);
  return learner;
}

std::unique_ptr<QmixLearner> QmixLearner::load_checkpoint(
    const std::string& path, const EnvConfig& expect_env) {
  auto learner = load_checkpoint(path);
  const EnvConfig& have = learner->env_config();
  if (have.n_agents != expect_env.n_agents ||
      have.obs_dim() != expect_env.obs_dim() ||
      have.state_dim() != expect_env.state_dim()) {
    std::ostringstream os;
    os << "checkpoint dimensions do not match the run config: checkpoint has "
       << "n_agents=" << have.n_agents << " obs_dim=" << have.obs_dim()
       << " state_dim=" << have.state_dim() << ", config expects n_agents="
       << expect_env.n_agents << " obs_dim=" << expect_env.obs_dim()
       << " state_dim=" << expect_env.state_dim();
    throw std::runtime_error(os.str());
  }
  return learner;
}

EpisodeTrace run_random_policy_episode(const EnvConfig& cfg,
                                       std::uint64_t seed) {
  Environment env(cfg);
  env.reset(seed);
  std::vector<Rng> streams;
  for (int i = 0; i < cfg.n_agents; ++i) {
    streams.push_back(Rng::substream(seed, static_cast<std::uint64_t>(i), 0,
                                     StreamPurpose::kExplore));
  }
  bool done = false;
  while (!done) {
    std::vector<Action> joint;
    for (int i = 0; i < cfg.n_agents; ++i) {
      joint.push_back(static_cast<Action>(streams[i].uniform_int(kNumActions)));
    }
    done = env.step(joint).done;
  }
  return env.trace();
}

EpisodeTrace run_greedy_episode(const nets::QmixModel<TrainScalar>& model,
                                const EnvConfig& cfg, std::uint64_t seed) {
  Environment env(cfg);
  auto rr = env.reset(seed);
  std::vector<std::vector<double>> obs = std::move(rr.observations);
  Rng unused(0);
  bool done = false;
  while (!done) {
    std::vector<Action> joint;
    for (int i = 0; i < cfg.n_agents; ++i) {
      joint.push_back(QmixLearner::select_action(model, obs[i], 0.0, unused));
    }
    StepResult sr = env.step(joint);
    obs = std::move(sr.observations);
    done = sr.done;
  }
  return env.trace();
}

}  // namespace habcov
