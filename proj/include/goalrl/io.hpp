#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "goalrl/training.hpp"

namespace goalrl {

/// Plain-text checkpoint:
///
///   goalrl-checkpoint <version>
///   step <n>
///   agent <gamma> <learning_rate> <batch> <sync> <warmup> <capacity> <train_every>
///   sizes <k> <d0> ... <dk-1>
///   bias <0|1>
///   <one line per weight row, then one line of biases, per layer>
///   end
///
/// Numbers are written in shortest round-trip form.
std::string checkpoint_to_string(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// episode,steps,accumulated_reward,epsilon,success_<goal>...
std::string metrics_csv(const std::vector<EpisodeMetrics>& metrics, const std::vector<std::string>& goal_names);
/// episode,accumulated_reward_ma,success_<goal>_ma...
std::string moving_average_csv(const std::vector<EpisodeMetrics>& metrics, const std::vector<std::string>& goal_names,
                               int window);
/// year,mean_contribution,min_contribution,max_contribution
std::string schedule_csv(const EvaluationReport& report);

void emit_metrics(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& metrics,
                  const std::vector<std::string>& goal_names);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace goalrl
