#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "scaffold/drl/features.hpp"
#include "scaffold/drl/network.hpp"
#include "scaffold/types.hpp"

namespace scaffold::drl {

struct Transition {
  std::vector<double> state;
  ProblemType action = ProblemType::PS;  // output index of the network
  double reward = 0.0;
  std::vector<double> next_state;  // empty or ignored when terminal
  bool terminal = false;
  std::string student_id;
  int decision_index = 0;
};

struct DdqnConfig {
  double learning_rate = 1e-3;
  double gamma = 0.99;
  int batch_size = 100;
  int target_sync_interval = 50;  // gradient steps
  int epochs = 60;
  std::uint64_t seed = 7;
  double held_out_fraction = 0.2;
  std::vector<int> hidden = {64, 128, 64};
  int actions = 3;

  /// Throws Error{InvalidArgument}.
  void validate() const;
};

/// y = r for terminal transitions, else r + gamma * Q_target(s', argmax_a Q_online(s', a)).
/// Throws Error{ShapeMismatch} if the networks differ in shape.
Vector ddqn_targets(std::span<const Transition> batch, const QNetwork& online, const QNetwork& target, double gamma);

struct EpochLoss {
  int epoch = 0;
  double train_loss = 0.0;    // mean minibatch loss
  double held_out_mse = 0.0;  // training-set MSE when nothing is held out
};

struct TrainedPolicy {
  QNetwork network;
  Normalizer normalizer;
  std::vector<std::string> feature_names;
  DdqnConfig config;
  std::vector<EpochLoss> loss_curve;
  int best_epoch = 0;
  std::size_t training_size = 0;
  std::size_t held_out_size = 0;
};

/// Optional hook called after each gradient step with the online and target
/// networks; used to observe target freezing.
using StepObserver = std::function<void(long step, const QNetwork& online, const QNetwork& target)>;

/// Offline Double DQN: seeded split and shuffles, Adam on the taken action's
/// squared error, target copied every target_sync_interval steps, and the
/// epoch checkpoint with the lowest held-out MSE is returned. Throws
/// Error{DatasetTooSmall} when the dataset is smaller than a batch and
/// Error{ShapeMismatch} on ragged states.
TrainedPolicy train_ddqn(std::span<const Transition> dataset, const DdqnConfig& config,
                         const Normalizer& normalizer = {}, const StepObserver& observer = {});

/// Greedy index; ties go to the lowest index.
int greedy_index(const Vector& q);

struct ActionChoice {
  ProblemType action = ProblemType::PS;
  std::array<double, 3> q{};
};

ActionChoice select_action(const QNetwork& network, std::span<const double> state);
inline ActionChoice select_action(const TrainedPolicy& policy, std::span<const double> state) {
  return select_action(policy.network, state);
}

/// test_score * (1 - problem_time). Throws Error{OutOfRange}.
double compute_reward(double test_score, double problem_time_normalized);

/// Self-describing JSON model document with an optional metadata object.
/// The loader throws Error{ModelFormat}.
std::string policy_to_json(const TrainedPolicy& policy, const nlohmann::json& meta = nlohmann::json::object());
TrainedPolicy policy_from_json(const std::string& text);

nlohmann::json normalizer_to_json(const Normalizer& normalizer);
/// Throws Error{ModelFormat}.
Normalizer normalizer_from_json(const nlohmann::json& doc);

}  // namespace scaffold::drl
