#include "scaffold/drl/ddqn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scaffold/error.hpp"

namespace scaffold::drl {
namespace {

using nlohmann::json;

constexpr const char* kModelFormat = "scaffold-ddqn";
constexpr int kModelVersion = 1;

struct Columns {
  Matrix states;
  Matrix next_states;
  std::vector<int> actions;
  Vector rewards;
  std::vector<bool> terminal;
};

Columns gather(std::span<const Transition> data, std::span<const std::size_t> idx, Eigen::Index width) {
  Columns c;
  const auto n = static_cast<Eigen::Index>(idx.size());
  c.states.resize(width, n);
  c.next_states = Matrix::Zero(width, n);
  c.rewards.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = data[idx[static_cast<std::size_t>(j)]];
    if (static_cast<Eigen::Index>(t.state.size()) != width) throw Error(Errc::ShapeMismatch, "ragged state width");
    c.states.col(j) = Eigen::Map<const Vector>(t.state.data(), width);
    if (!t.terminal) {
      if (static_cast<Eigen::Index>(t.next_state.size()) != width) {
        throw Error(Errc::ShapeMismatch, "ragged next-state width");
      }
      c.next_states.col(j) = Eigen::Map<const Vector>(t.next_state.data(), width);
    }
    c.actions.push_back(static_cast<int>(index_of(t.action)));
    c.rewards(j) = t.reward;
    c.terminal.push_back(t.terminal);
  }
  return c;
}

Vector targets_for(const Columns& c, const QNetwork& online, const QNetwork& target, double gamma) {
  if (!online.same_shape(target)) throw Error(Errc::ShapeMismatch, "online and target networks differ in shape");
  const Matrix q_online = online.forward_batch(c.next_states);
  const Matrix q_target = target.forward_batch(c.next_states);
  Vector y = c.rewards;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (c.terminal[static_cast<std::size_t>(j)]) continue;
    const int a = greedy_index(q_online.col(j));
    y(j) += gamma * q_target(a, j);
  }
  return y;
}

json matrix_rows(const Matrix& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return flat;
}

}  // namespace

void DdqnConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::InvalidArgument, what); };
  if (!(learning_rate > 0.0)) bad("learning rate must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) bad("discount must lie in (0, 1]");
  if (batch_size < 1) bad("batch size must be positive");
  if (target_sync_interval < 1) bad("target sync interval must be positive");
  if (epochs < 1) bad("epochs must be positive");
  if (!(held_out_fraction >= 0.0 && held_out_fraction < 1.0)) bad("held-out fraction must lie in [0, 1)");
  if (actions < 1) bad("need at least one action");
  for (int h : hidden) {
    if (h < 1) bad("hidden widths must be positive");
  }
}

Vector ddqn_targets(std::span<const Transition> batch, const QNetwork& online, const QNetwork& target, double gamma) {
  if (!online.same_shape(target)) throw Error(Errc::ShapeMismatch, "online and target networks differ in shape");
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  return targets_for(gather(batch, idx, online.inputs()), online, target, gamma);
}

TrainedPolicy train_ddqn(std::span<const Transition> dataset, const DdqnConfig& config, const Normalizer& normalizer,
                         const StepObserver& observer) {
  config.validate();
  if (dataset.size() < static_cast<std::size_t>(config.batch_size)) {
    throw Error(Errc::DatasetTooSmall, "dataset has " + std::to_string(dataset.size()) +
                                           " transitions, batch size is " + std::to_string(config.batch_size));
  }
  const auto width = static_cast<int>(dataset.front().state.size());
  if (width < 1) throw Error(Errc::ShapeMismatch, "empty state vector");

  std::mt19937_64 rng(config.seed);
  std::vector<int> dims{width};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.actions);
  QNetwork online = QNetwork::he_initialized(dims, rng);
  QNetwork target = online;
  Adam adam(online, {config.learning_rate});

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto held = static_cast<std::size_t>(std::llround(config.held_out_fraction * static_cast<double>(dataset.size())));
  if (config.held_out_fraction > 0.0 && held == 0) held = 1;
  held = std::min(held, dataset.size() - 1);
  std::vector<std::size_t> held_idx(order.begin(), order.begin() + static_cast<long>(held));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(held), order.end());
  std::sort(held_idx.begin(), held_idx.end());
  const std::size_t batch = std::min(train_idx.size(), static_cast<std::size_t>(config.batch_size));

  const Columns all_train = gather(dataset, train_idx, width);
  const Columns held_cols = held_idx.empty() ? all_train : gather(dataset, held_idx, width);
  const Columns& eval = held_idx.empty() ? all_train : held_cols;

  TrainedPolicy best;
  best.normalizer = normalizer;
  best.config = config;
  best.training_size = train_idx.size();
  best.held_out_size = held_idx.size();
  double best_mse = std::numeric_limits<double>::infinity();

  QNetwork::Gradients grads;
  long step = 0;
  std::vector<std::size_t> perm(train_idx.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < perm.size(); start += batch) {
      const std::size_t end = std::min(perm.size(), start + batch);
      std::vector<std::size_t> idx;
      for (std::size_t k = start; k < end; ++k) idx.push_back(train_idx[perm[k]]);
      const Columns c = gather(dataset, idx, width);
      const Vector y = targets_for(c, online, target, config.gamma);
      loss_sum += online.loss_and_gradients(c.states, c.actions, y, grads);
      ++batches;
      adam.step(online, grads);
      ++step;
      if (step % config.target_sync_interval == 0) target = online;
      if (observer) observer(step, online, target);
    }
    if (!online.all_finite()) {
      throw Error(Errc::InvalidArgument, "training diverged to non-finite weights at epoch " + std::to_string(epoch));
    }
    const double mse = online.loss(eval.states, eval.actions, targets_for(eval, online, target, config.gamma));
    best.loss_curve.push_back({epoch, loss_sum / batches, mse});
    if (mse < best_mse) {
      best_mse = mse;
      best.network = online;
      best.best_epoch = epoch;
    }
  }
  best.feature_names = width == static_cast<int>(kStateSize) ? default_registry().names() : std::vector<std::string>{};
  return best;
}

int greedy_index(const Vector& q) {
  int best = 0;
  for (int i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return best;
}

ActionChoice select_action(const QNetwork& network, std::span<const double> state) {
  if (network.outputs() != 3) throw Error(Errc::ShapeMismatch, "policy network must have 3 outputs");
  const Vector x = Eigen::Map<const Vector>(state.data(), static_cast<Eigen::Index>(state.size()));
  const Vector q = network.forward(x);
  ActionChoice out;
  for (int i = 0; i < 3; ++i) out.q[static_cast<std::size_t>(i)] = q(i);
  out.action = kProblemTypes[static_cast<std::size_t>(greedy_index(q))];
  return out;
}

double compute_reward(double test_score, double problem_time) {
  if (!(test_score >= 0.0 && test_score <= 100.0)) throw Error(Errc::OutOfRange, "test score outside [0, 100]");
  if (!(problem_time >= 0.0 && problem_time <= 1.0)) throw Error(Errc::OutOfRange, "problem time outside [0, 1]");
  return test_score * (1.0 - problem_time);
}

json normalizer_to_json(const Normalizer& n) {
  json levels = json::array();
  for (std::size_t l = 0; l < n.level_time.size(); ++l) {
    levels.push_back({{"level", l}, {"lo", n.level_time[l].lo}, {"hi", n.level_time[l].hi}});
  }
  return {{"level_time", levels}, {"feature_lo", n.feature_lo}, {"feature_hi", n.feature_hi}};
}

Normalizer normalizer_from_json(const json& doc) {
  try {
    Normalizer n;
    for (const auto& l : doc.at("level_time")) {
      const auto level = l.at("level").get<std::size_t>();
      if (level >= n.level_time.size()) throw Error(Errc::ModelFormat, "level out of range in normalizer");
      n.level_time[level] = {l.at("lo").get<double>(), l.at("hi").get<double>()};
    }
    n.feature_lo = doc.at("feature_lo").get<std::vector<double>>();
    n.feature_hi = doc.at("feature_hi").get<std::vector<double>>();
    if (n.feature_lo.size() != n.feature_hi.size()) throw Error(Errc::ModelFormat, "normalizer bounds differ in length");
    return n;
  } catch (const json::exception& e) {
    throw Error(Errc::ModelFormat, std::string("bad normalizer: ") + e.what());
  }
}

std::string policy_to_json(const TrainedPolicy& p, const json& meta) {
  json layers = json::array();
  for (const auto& l : p.network.layers()) {
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", matrix_rows(l.weights)},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  json curve = json::array();
  for (const auto& e : p.loss_curve) {
    curve.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"held_out_mse", e.held_out_mse}});
  }
  const auto& c = p.config;
  json doc = {
      {"format", kModelFormat},
      {"version", kModelVersion},
      {"meta", meta},
      {"dims", p.network.dims()},
      {"activation", {{"hidden", "relu"}, {"output", "linear"}}},
      {"action_order", {"PS", "Guided", "Buggy"}},
      {"layers", layers},
      {"features", p.feature_names},
      {"normalizer", normalizer_to_json(p.normalizer)},
      {"config",
       {{"learning_rate", c.learning_rate},
        {"gamma", c.gamma},
        {"batch_size", c.batch_size},
        {"target_sync_interval", c.target_sync_interval},
        {"epochs", c.epochs},
        {"held_out_fraction", c.held_out_fraction},
        {"hidden", c.hidden},
        {"actions", c.actions}}},
      {"seed", c.seed},
      {"training_size", p.training_size},
      {"held_out_size", p.held_out_size},
      {"best_epoch", p.best_epoch},
      {"loss_curve", curve},
  };
  return doc.dump(1) + "\n";
}

TrainedPolicy policy_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ModelFormat, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != kModelFormat) throw Error(Errc::ModelFormat, "not a model document");
    if (doc.at("version") != kModelVersion) {
      throw Error(Errc::ModelFormat, "unsupported model version " + doc.at("version").dump());
    }
    TrainedPolicy p;
    p.network = QNetwork(doc.at("dims").get<std::vector<int>>());
    const auto& layers = doc.at("layers");
    if (layers.size() != p.network.layers().size()) throw Error(Errc::ModelFormat, "layer count disagrees with dims");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto& l = p.network.layers()[i];
      const auto w = layers[i].at("weights").get<std::vector<double>>();
      const auto b = layers[i].at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != l.weights.size() || static_cast<Eigen::Index>(b.size()) != l.bias.size()) {
        throw Error(Errc::ModelFormat, "layer " + std::to_string(i) + " has the wrong number of parameters");
      }
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
        for (Eigen::Index col = 0; col < l.weights.cols(); ++col) {
          l.weights(r, col) = w[static_cast<std::size_t>(r * l.weights.cols() + col)];
        }
      }
      l.bias = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    p.feature_names = doc.at("features").get<std::vector<std::string>>();
    if (!p.feature_names.empty() && static_cast<int>(p.feature_names.size()) != p.network.inputs()) {
      throw Error(Errc::ModelFormat, "feature list disagrees with the input width");
    }
    p.normalizer = normalizer_from_json(doc.at("normalizer"));
    const auto& c = doc.at("config");
    p.config.learning_rate = c.at("learning_rate").get<double>();
    p.config.gamma = c.at("gamma").get<double>();
    p.config.batch_size = c.at("batch_size").get<int>();
    p.config.target_sync_interval = c.at("target_sync_interval").get<int>();
    p.config.epochs = c.at("epochs").get<int>();
    p.config.held_out_fraction = c.at("held_out_fraction").get<double>();
    p.config.hidden = c.at("hidden").get<std::vector<int>>();
    p.config.actions = c.at("actions").get<int>();
    p.config.seed = doc.at("seed").get<std::uint64_t>();
    p.training_size = doc.at("training_size").get<std::size_t>();
    p.held_out_size = doc.at("held_out_size").get<std::size_t>();
    p.best_epoch = doc.at("best_epoch").get<int>();
    for (const auto& e : doc.at("loss_curve")) {
      p.loss_curve.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                              e.at("held_out_mse").get<double>()});
    }
    if (!p.network.all_finite()) throw Error(Errc::ModelFormat, "model contains non-finite weights");
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::ModelFormat, std::string("bad model document: ") + e.what());
  }
}

}  // namespace scaffold::drl
