#include "lrforge/budget.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "lrforge/error.hpp"

namespace lrforge::budget {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::config, what);
}

std::string num(double v, int precision = 6) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

KvFile checked(const KvFile& file, const KvSchema& schema, std::string_view origin) {
  const auto diags = validate(file, schema);
  if (!diags.empty()) throw Error(Errc::config, format_diagnostics(diags, origin));
  return file;
}

template <typename T, typename Preset, typename FromKv>
T load_named(const std::string& name_or_path, Preset preset, FromKv from_kv) {
  if (auto p = preset(name_or_path)) return *p;
  if (!std::filesystem::exists(name_or_path)) {
    // A bare word is a preset name, anything else a path.
    if (name_or_path.find_first_of("/.") == std::string::npos) {
      throw Error(Errc::config, "unknown preset `" + name_or_path + "`");
    }
    throw Error(Errc::io, "no preset or file named `" + name_or_path + "`");
  }
  return from_kv(read_kv_file(name_or_path), name_or_path);
}

}  // namespace

HardwareProfile table3_profile() {
  HardwareProfile hw;
  hw.name = "table3";
  hw.gpu_count = 4;
  hw.peak_tflops = 112.0;
  hw.power_per_gpu_w = 300.0;
  hw.node_power_factor = 1.0;
  hw.mem_bandwidth_gb_s = 900.0;
  hw.bytes_per_param = 4.0;
  hw.price_per_gpu_hour = 0.35;  // USD, V100 spot
  hw.grid_kg_co2_per_kwh = 0.4;
  return hw;
}

HardwareProfile appendix_profile() {
  HardwareProfile hw;
  hw.name = "appendix";
  hw.gpu_count = 1;
  hw.peak_tflops = 112.0;
  hw.power_per_gpu_w = 300.0;
  hw.node_power_factor = 2.0;
  hw.mem_bandwidth_gb_s = 900.0;
  hw.bytes_per_param = 4.0;
  hw.price_per_gpu_hour = 21.0;  // PKR
  hw.grid_kg_co2_per_kwh = 0.485;
  return hw;
}

std::optional<ModelShape> shape_preset(std::string_view name) {
  if (name == "urdulm-100m-10k") return ModelShape{100e6, 12, 768, 12, 64, 1024, 10000};
  if (name == "urdulm-100m-20k") return ModelShape{116e6, 12, 768, 16, 64, 1024, 20000};
  if (name == "urdulm-100m-32k") return ModelShape{134e6, 12, 768, 16, 64, 1024, 32000};
  if (name == "llama-3.2-3b") return ModelShape{3.21e9, 28, 3072, 24, 128, 131072, 128256};
  return std::nullopt;
}

std::optional<TrainPlan> plan_preset(std::string_view name) {
  if (name == "pretrain") {
    TrainPlan p;
    p.wall_hours = 66.0;
    return p;
  }
  if (name == "finetune-1gb-urdulm" || name == "finetune-1gb-llama") {
    TrainPlan p;
    p.warmup_tokens = 0;
    p.epochs = 1;
    p.total_tokens = name == "finetune-1gb-urdulm" ? 180e6 : 504e6;
    p.data_parallel = 1;
    return p;
  }
  return std::nullopt;
}

std::optional<HardwareProfile> hardware_preset(std::string_view name) {
  if (name == "table3") return table3_profile();
  if (name == "appendix") return appendix_profile();
  return std::nullopt;
}

void validate(const ModelShape& s) {
  require(s.n_params > 0 && s.n_layers > 0 && s.d_model > 0 && s.n_heads > 0 && s.d_head > 0 &&
              s.n_ctx > 0 && s.vocab_size > 0,
          "model shape fields must be positive");
}

void validate(const TrainPlan& p) {
  require(p.peak_lr > 0, "peak_lr must be positive");
  require(p.min_lr_ratio > 0 && p.min_lr_ratio < 1, "min_lr_ratio must be in (0, 1)");
  require(p.warmup_tokens >= 0 && p.warmup_tokens < p.total_tokens,
          "warmup_tokens must be in [0, total_tokens)");
  require(p.batch_tokens > 0 && p.epochs > 0, "batch_tokens and epochs must be positive");
  require(p.micro_batch_seqs >= 1 && p.data_parallel >= 1,
          "micro_batch_seqs and data_parallel must be >= 1");
  require(!p.wall_hours || *p.wall_hours >= 0, "wall_hours must be non-negative");
}

void validate(const HardwareProfile& h) {
  require(h.gpu_count > 0 && h.peak_tflops > 0 && h.power_per_gpu_w > 0 &&
              h.node_power_factor > 0 && h.mem_bandwidth_gb_s > 0 && h.bytes_per_param > 0 &&
              h.price_per_gpu_hour > 0 && h.grid_kg_co2_per_kwh > 0,
          "hardware profile fields must be positive");
}

double lr_at(double tokens_seen, const TrainPlan& plan) {
  if (!(tokens_seen >= 0 && tokens_seen <= plan.total_tokens)) {
    throw Error(Errc::out_of_range, "tokens_seen " + num(tokens_seen) + " outside [0, " +
                                        num(plan.total_tokens) + "]");
  }
  const double peak = plan.peak_lr;
  if (tokens_seen < plan.warmup_tokens) return peak * tokens_seen / plan.warmup_tokens;
  const double min_lr = plan.min_lr_ratio * peak;
  if (tokens_seen == plan.warmup_tokens) return peak;
  const double progress =
      (tokens_seen - plan.warmup_tokens) / (plan.total_tokens - plan.warmup_tokens);
  return min_lr + 0.5 * (peak - min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

double training_flops(double n_params, double tokens) { return 6.0 * n_params * tokens; }

double inference_prefill_flops(double n_params, double prompt_tokens) {
  return 2.0 * n_params * prompt_tokens;
}

double memory_bound_latency_ms(double n_params, double bytes_per_param, double bandwidth_gb_s) {
  if (!(bandwidth_gb_s > 0)) throw Error(Errc::config, "bandwidth must be positive");
  return n_params * bytes_per_param / (bandwidth_gb_s * 1e9) * 1e3;
}

double wall_time_lower_bound_hours(double flops, const HardwareProfile& hw) {
  return flops / (hw.gpu_count * hw.peak_tflops * 1e12) / 3600.0;
}

EnergyCarbon energy_and_carbon(double hours, const HardwareProfile& hw) {
  EnergyCarbon e;
  e.kwh = hours * hw.gpu_count * hw.power_per_gpu_w * hw.node_power_factor / 1000.0;
  e.kg_co2 = e.kwh * hw.grid_kg_co2_per_kwh;
  return e;
}

double inference_energy_j(double latency_ms, const HardwareProfile& hw) {
  return latency_ms / 1e3 * hw.power_per_gpu_w;
}

AccumulationPlan grad_accum_plan(double batch_tokens, int n_ctx, int micro_batch_seqs,
                                 int data_parallel) {
  if (micro_batch_seqs < 1 || data_parallel < 1 || n_ctx < 1) {
    throw Error(Errc::config, "n_ctx, micro_batch_seqs and data_parallel must be >= 1");
  }
  AccumulationPlan plan;
  const double per_step = static_cast<double>(n_ctx) * micro_batch_seqs * data_parallel;
  plan.steps = static_cast<int>(std::ceil(batch_tokens / per_step));
  plan.sequences = static_cast<long long>(plan.steps) * micro_batch_seqs * data_parallel;
  plan.tokens = static_cast<double>(plan.sequences) * n_ctx;
  return plan;
}

Estimates estimate_training(const ModelShape& shape, const TrainPlan& plan,
                            const HardwareProfile& hw) {
  Estimates e;
  e.flops = training_flops(shape.n_params, plan.total_tokens);
  e.flops_per_step = training_flops(shape.n_params, plan.batch_tokens);
  e.steps = std::ceil(plan.total_tokens / plan.batch_tokens);
  e.lower_bound_hours = wall_time_lower_bound_hours(e.flops, hw);
  e.wall_hours = plan.wall_hours.value_or(e.lower_bound_hours);
  const auto ec = energy_and_carbon(e.wall_hours, hw);
  e.energy_kwh = ec.kwh;
  e.co2_kg = ec.kg_co2;
  e.cost = e.wall_hours * hw.gpu_count * hw.price_per_gpu_hour;
  e.accumulation =
      grad_accum_plan(plan.batch_tokens, shape.n_ctx, plan.micro_batch_seqs, plan.data_parallel);
  return e;
}

InferenceEstimates estimate_inference(const ModelShape& shape, double prompt_tokens,
                                      const HardwareProfile& hw) {
  InferenceEstimates e;
  e.flops = inference_prefill_flops(shape.n_params, prompt_tokens);
  e.latency_ms = memory_bound_latency_ms(shape.n_params, hw.bytes_per_param, hw.mem_bandwidth_gb_s);
  e.energy_j = inference_energy_j(e.latency_ms, hw);
  e.cost_per_1k = e.latency_ms * 1000.0 / 3.6e6 * hw.price_per_gpu_hour;
  return e;
}

std::string format_estimates(const ModelShape& shape, const TrainPlan& plan,
                             const HardwareProfile& hw, const Estimates& est) {
  std::ostringstream out;
  const auto row = [&out](std::string_view label, const std::string& value) {
    out << label;
    for (std::size_t i = label.size(); i < 34; ++i) out << ' ';
    out << value << '\n';
  };
  const double per_epoch_flops = est.flops / plan.epochs;
  row("Model size", num(shape.n_params / 1e6, 4) + " M parameters");
  row("Token sequence length", std::to_string(shape.n_ctx));
  row("Batch size (effective)", std::to_string(est.accumulation.sequences) + " samples ~ " +
                                    num(plan.batch_tokens / 1e6, 3) + "M tokens");
  row("Gradient accumulation steps", std::to_string(est.accumulation.steps) + " x " +
                                         std::to_string(plan.micro_batch_seqs) + " seqs x " +
                                         std::to_string(plan.data_parallel) + " replicas");
  row("FLOPs per step", num(est.flops_per_step / 1e12, 5) + " TFLOPs");
  row("Total compute per epoch", num(per_epoch_flops / 1e15, 5) + " PFLOPs");
  row("Total compute (" + std::to_string(plan.epochs) + " epochs)", num(est.flops / 1e15, 5) + " PFLOPs");
  row("GPU count", std::to_string(hw.gpu_count) + " (" + num(hw.peak_tflops) + " TFLOPS peak)");
  row("Power consumption per GPU", num(hw.power_per_gpu_w) + " W");
  row("Training time per epoch", num(est.wall_hours / plan.epochs, 5) + " hours");
  row("Total training time", num(est.wall_hours, 5) + " hours" +
                                 (plan.wall_hours ? " (measured)" : " (peak-throughput bound)"));
  row("Theoretical minimum time", num(est.lower_bound_hours, 5) + " hours");
  row("Total energy", num(est.energy_kwh, 5) + " kWh");
  row("Estimated carbon footprint", num(est.co2_kg, 5) + " kg CO2 (at " +
                                        num(hw.grid_kg_co2_per_kwh) + " kg/kWh)");
  row("Estimated cost", num(est.cost, 5));
  return out.str();
}

std::string schedule_csv(const TrainPlan& plan, int points) {
  if (points < 2) throw Error(Errc::config, "schedule needs at least two points");
  std::ostringstream out;
  out << "tokens_seen,lr\n";
  out.precision(10);
  for (int i = 0; i < points; ++i) {
    const double t = i == points - 1 ? plan.total_tokens
                                     : plan.total_tokens * static_cast<double>(i) / (points - 1);
    out << std::llround(t) << ',' << lr_at(t, plan) << '\n';
  }
  return out.str();
}

KvSchema shape_schema() {
  KvSchema s;
  s.sections[""] = {{"n_params", KvType::number, true},  {"n_layers", KvType::integer, true},
                    {"d_model", KvType::integer, true},  {"n_heads", KvType::integer, true},
                    {"d_head", KvType::integer, true},   {"n_ctx", KvType::integer, true},
                    {"vocab_size", KvType::integer, true}};
  return s;
}

KvSchema plan_schema() {
  KvSchema s;
  s.sections[""] = {{"peak_lr", KvType::number, true},
                    {"min_lr_ratio", KvType::number},
                    {"warmup_tokens", KvType::number, true},
                    {"total_tokens", KvType::number, true},
                    {"batch_tokens", KvType::number},
                    {"epochs", KvType::integer},
                    {"adam_beta1", KvType::number},
                    {"adam_beta2", KvType::number},
                    {"adam_eps", KvType::number},
                    {"grad_clip_norm", KvType::number},
                    {"micro_batch_seqs", KvType::integer},
                    {"data_parallel", KvType::integer},
                    {"wall_hours", KvType::number}};
  return s;
}

KvSchema hardware_schema() {
  KvSchema s;
  s.sections[""] = {{"name", KvType::string},
                    {"gpu_count", KvType::integer, true},
                    {"peak_tflops", KvType::number, true},
                    {"power_per_gpu_w", KvType::number, true},
                    {"node_power_factor", KvType::number},
                    {"mem_bandwidth_gb_s", KvType::number},
                    {"bytes_per_param", KvType::number},
                    {"price_per_gpu_hour", KvType::number},
                    {"grid_kg_co2_per_kwh", KvType::number, true}};
  return s;
}

ModelShape shape_from_kv(const KvFile& file) {
  const KvSection kv(checked(file, shape_schema(), "shape"), "");
  ModelShape s;
  s.n_params = kv.get_number("n_params", s.n_params);
  s.n_layers = static_cast<int>(kv.get_integer("n_layers", s.n_layers));
  s.d_model = static_cast<int>(kv.get_integer("d_model", s.d_model));
  s.n_heads = static_cast<int>(kv.get_integer("n_heads", s.n_heads));
  s.d_head = static_cast<int>(kv.get_integer("d_head", s.d_head));
  s.n_ctx = static_cast<int>(kv.get_integer("n_ctx", s.n_ctx));
  s.vocab_size = static_cast<int>(kv.get_integer("vocab_size", s.vocab_size));
  validate(s);
  return s;
}

TrainPlan plan_from_kv(const KvFile& file) {
  const KvSection kv(checked(file, plan_schema(), "plan"), "");
  TrainPlan p;
  p.peak_lr = kv.get_number("peak_lr", p.peak_lr);
  p.min_lr_ratio = kv.get_number("min_lr_ratio", p.min_lr_ratio);
  p.warmup_tokens = kv.get_number("warmup_tokens", p.warmup_tokens);
  p.total_tokens = kv.get_number("total_tokens", p.total_tokens);
  p.batch_tokens = kv.get_number("batch_tokens", p.batch_tokens);
  p.epochs = static_cast<int>(kv.get_integer("epochs", p.epochs));
  p.adam_beta1 = kv.get_number("adam_beta1", p.adam_beta1);
  p.adam_beta2 = kv.get_number("adam_beta2", p.adam_beta2);
  p.adam_eps = kv.get_number("adam_eps", p.adam_eps);
  p.grad_clip_norm = kv.get_number("grad_clip_norm", p.grad_clip_norm);
  p.micro_batch_seqs = static_cast<int>(kv.get_integer("micro_batch_seqs", p.micro_batch_seqs));
  p.data_parallel = static_cast<int>(kv.get_integer("data_parallel", p.data_parallel));
  if (kv.has("wall_hours")) p.wall_hours = kv.get_number("wall_hours", 0.0);
  validate(p);
  return p;
}

HardwareProfile hardware_from_kv(const KvFile& file) {
  const KvSection kv(checked(file, hardware_schema(), "hardware"), "");
  HardwareProfile h;
  h.name = kv.get_string("name", h.name);
  h.gpu_count = static_cast<int>(kv.get_integer("gpu_count", h.gpu_count));
  h.peak_tflops = kv.get_number("peak_tflops", h.peak_tflops);
  h.power_per_gpu_w = kv.get_number("power_per_gpu_w", h.power_per_gpu_w);
  h.node_power_factor = kv.get_number("node_power_factor", h.node_power_factor);
  h.mem_bandwidth_gb_s = kv.get_number("mem_bandwidth_gb_s", h.mem_bandwidth_gb_s);
  h.bytes_per_param = kv.get_number("bytes_per_param", h.bytes_per_param);
  h.price_per_gpu_hour = kv.get_number("price_per_gpu_hour", h.price_per_gpu_hour);
  h.grid_kg_co2_per_kwh = kv.get_number("grid_kg_co2_per_kwh", h.grid_kg_co2_per_kwh);
  validate(h);
  return h;
}

ModelShape load_shape(const std::string& name_or_path) {
  return load_named<ModelShape>(name_or_path, shape_preset,
                                [](const KvFile& f, const std::string&) { return shape_from_kv(f); });
}

TrainPlan load_plan(const std::string& name_or_path) {
  return load_named<TrainPlan>(name_or_path, plan_preset,
                               [](const KvFile& f, const std::string&) { return plan_from_kv(f); });
}

HardwareProfile load_hardware(const std::string& name_or_path) {
  return load_named<HardwareProfile>(
      name_or_path, hardware_preset,
      [](const KvFile& f, const std::string&) { return hardware_from_kv(f); });
}

}  // namespace lrforge::budget
