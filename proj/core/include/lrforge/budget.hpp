#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrforge/kv_config.hpp"

namespace lrforge::budget {

struct ModelShape {
  double n_params = 134e6;
  int n_layers = 12;
  int d_model = 768;
  int n_heads = 16;
  int d_head = 64;
  int n_ctx = 1024;
  int vocab_size = 32000;
};

struct TrainPlan {
  double peak_lr = 6.0e-4;
  double min_lr_ratio = 0.1;
  double warmup_tokens = 171e6;
  double total_tokens = 5.5e9;
  double batch_tokens = 0.5e6;
  int epochs = 3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.95;
  double adam_eps = 1e-8;
  double grad_clip_norm = 1.0;
  int micro_batch_seqs = 8;
  int data_parallel = 4;
  // Measured wall-clock hours; when set it replaces the peak-throughput
  // lower bound in energy and cost estimates.
  std::optional<double> wall_hours;
};

struct HardwareProfile {
  std::string name = "custom";
  int gpu_count = 1;
  double peak_tflops = 112.0;
  double power_per_gpu_w = 300.0;
  double node_power_factor = 1.0;
  double mem_bandwidth_gb_s = 900.0;
  double bytes_per_param = 4.0;
  double price_per_gpu_hour = 1.0;
  double grid_kg_co2_per_kwh = 0.4;
};

// Four V100s, 300 W each, no node overhead, 0.4 kg/kWh grid.
HardwareProfile table3_profile();
// One V100 at 112 TFLOPS peak, node factor 2.0, 0.485 kg/kWh grid, price in
// PKR per GPU-hour.
HardwareProfile appendix_profile();

// Named presets for shapes and plans used by the CLI.
std::optional<ModelShape> shape_preset(std::string_view name);
std::optional<TrainPlan> plan_preset(std::string_view name);
std::optional<HardwareProfile> hardware_preset(std::string_view name);

// Throws Errc::config on non-positive fields or an inconsistent plan.
void validate(const ModelShape& shape);
void validate(const TrainPlan& plan);
void validate(const HardwareProfile& hw);

// Linear warmup to peak, then cosine decay to min_lr_ratio * peak.
// Throws Errc::out_of_range outside [0, total_tokens].
double lr_at(double tokens_seen, const TrainPlan& plan);

double training_flops(double n_params, double tokens);
double inference_prefill_flops(double n_params, double prompt_tokens);

// Weight bytes streamed once at `bandwidth_gb_s` (1 GB = 1e9 B), in ms.
double memory_bound_latency_ms(double n_params, double bytes_per_param, double bandwidth_gb_s);

double wall_time_lower_bound_hours(double flops, const HardwareProfile& hw);

struct EnergyCarbon {
  double kwh = 0;
  double kg_co2 = 0;
};

EnergyCarbon energy_and_carbon(double hours, const HardwareProfile& hw);

// Single GPU draw for the latency window, no node factor.
double inference_energy_j(double latency_ms, const HardwareProfile& hw);

struct AccumulationPlan {
  int steps = 0;              // micro-batches accumulated per optimizer step, per replica
  long long sequences = 0;    // sequences per optimizer step over all replicas
  double tokens = 0;          // tokens per optimizer step over all replicas
};

// ceil(batch_tokens / (n_ctx * micro_batch_seqs * data_parallel)).
AccumulationPlan grad_accum_plan(double batch_tokens, int n_ctx, int micro_batch_seqs,
                                 int data_parallel = 1);

struct Estimates {
  double flops = 0;
  double flops_per_step = 0;
  double steps = 0;
  double wall_hours = 0;
  double lower_bound_hours = 0;
  double energy_kwh = 0;
  double co2_kg = 0;
  double cost = 0;
  AccumulationPlan accumulation;
};

Estimates estimate_training(const ModelShape& shape, const TrainPlan& plan,
                            const HardwareProfile& hw);

struct InferenceEstimates {
  double flops = 0;
  double latency_ms = 0;
  double energy_j = 0;
  double cost_per_1k = 0;
};

InferenceEstimates estimate_inference(const ModelShape& shape, double prompt_tokens,
                                      const HardwareProfile& hw);

// Rows labelled like a training resource summary table.
std::string format_estimates(const ModelShape& shape, const TrainPlan& plan,
                             const HardwareProfile& hw, const Estimates& est);

// (tokens_seen, lr) at `points` evenly spaced positions including both ends.
std::string schedule_csv(const TrainPlan& plan, int points);

// Config files: flat key = value, unknown keys rejected (Errc::config).
KvSchema shape_schema();
KvSchema plan_schema();
KvSchema hardware_schema();
ModelShape shape_from_kv(const KvFile& file);
TrainPlan plan_from_kv(const KvFile& file);
HardwareProfile hardware_from_kv(const KvFile& file);

// A preset name or a path to a config file.
ModelShape load_shape(const std::string& name_or_path);
TrainPlan load_plan(const std::string& name_or_path);
HardwareProfile load_hardware(const std::string& name_or_path);

}  // namespace lrforge::budget
