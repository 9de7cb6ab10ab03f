// SPDX-License-Identifier: Apache-2.0
#include "recipe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "error.hpp"

namespace rsb {

namespace {

// ---------------------------------------------------------------------------
// Scalar formatting/parsing: shortest round-trip for doubles.

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

template <typename T>
T parse_uint(const std::string& s) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected an unsigned integer, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("expected true/false, got '" + s + "'");
}

std::string fmt_milestones(const std::vector<double>& ms) {
  std::string out;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(ms[i]);
  }
  return out;
}

std::vector<double> parse_milestones(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok =
        s.substr(start, comma == std::string::npos ? std::string::npos
                                                   : comma - start);
    out.push_back(parse_double(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enum name tables.

template <typename E>
struct EnumEntry {
  E value;
  const char* name;
};

constexpr EnumEntry<OptimizerKind> kOptimizerNames[] = {
    {OptimizerKind::Lamb, "lamb"},
    {OptimizerKind::SgdNesterov, "sgd_nesterov"},
    {OptimizerKind::RmspropTf, "rmsprop_tf"},
    {OptimizerKind::AdamP, "adamp"},
};
constexpr EnumEntry<ScheduleKind> kScheduleNames[] = {
    {ScheduleKind::Cosine, "cosine"},
    {ScheduleKind::Step, "step"},
    {ScheduleKind::Waterfall, "waterfall"},
};
constexpr EnumEntry<LossKind> kLossNames[] = {
    {LossKind::Ce, "ce"},
    {LossKind::Bce, "bce"},
};
constexpr EnumEntry<BceStyle> kBceStyleNames[] = {
    {BceStyle::Multilabel, "multilabel"},
    {BceStyle::Normalized, "normalized"},
};
constexpr EnumEntry<MixMode> kMixModeNames[] = {
    {MixMode::Batchwise, "batchwise"},
    {MixMode::Pairwise, "pairwise"},
    {MixMode::Elementwise, "elementwise"},
    {MixMode::Half, "half"},
};
constexpr EnumEntry<GradClipKind> kGradClipNames[] = {
    {GradClipKind::None, "none"},
    {GradClipKind::Agc, "agc"},
};

template <typename E, std::size_t N>
std::string enum_name(const EnumEntry<E> (&table)[N], E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  throw ConfigError("unknown enum value");
}

template <typename E, std::size_t N>
E enum_value(const EnumEntry<E> (&table)[N], const std::string& s) {
  for (const auto& e : table) {
    if (s == e.name) return e.value;
  }
  std::string options;
  for (const auto& e : table) {
    if (!options.empty()) options += "|";
    options += e.name;
  }
  throw ConfigError("expected one of {" + options + "}, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Field table: one entry per config key.

struct Field {
  const char* key;
  std::function<std::string(const Recipe&)> get;
  std::function<void(Recipe&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto dbl = [&f](const char* key, double Recipe::* member) {
      f.push_back({key,
                   [member](const Recipe& r) { return fmt_double(r.*member); },
                   [member](Recipe& r, const std::string& s) {
                     r.*member = parse_double(s);
                   }});
    };
    auto u32 = [&f](const char* key, std::uint32_t Recipe::* member) {
      f.push_back({key,
                   [member](const Recipe& r) { return std::to_string(r.*member); },
                   [member](Recipe& r, const std::string& s) {
                     r.*member = parse_uint<std::uint32_t>(s);
                   }});
    };
    auto u64 = [&f](const char* key, std::uint64_t Recipe::* member) {
      f.push_back({key,
                   [member](const Recipe& r) { return std::to_string(r.*member); },
                   [member](Recipe& r, const std::string& s) {
                     r.*member = parse_uint<std::uint64_t>(s);
                   }});
    };
    auto boolean = [&f](const char* key, bool Recipe::* member) {
      f.push_back({key,
                   [member](const Recipe& r) { return r.*member ? "true" : "false"; },
                   [member](Recipe& r, const std::string& s) {
                     r.*member = parse_bool(s);
                   }});
    };

    u32("batch_size", &Recipe::batch_size);
    dbl("cutmix_alpha", &Recipe::cutmix_alpha);
    dbl("drop_path", &Recipe::drop_path);
    dbl("dropout", &Recipe::dropout);
    dbl("ema.decay", &Recipe::ema_decay);
    boolean("ema.enabled", &Recipe::ema);
    u32("epochs", &Recipe::epochs);
    dbl("grad_clip.agc_eps", &Recipe::agc_eps);
    dbl("grad_clip.agc_lambda", &Recipe::agc_lambda);
    f.push_back({"grad_clip.kind",
                 [](const Recipe& r) { return enum_name(kGradClipNames, r.grad_clip); },
                 [](Recipe& r, const std::string& s) {
                   r.grad_clip = enum_value(kGradClipNames, s);
                 }});
    f.push_back({"loss.bce_style",
                 [](const Recipe& r) { return enum_name(kBceStyleNames, r.bce_style); },
                 [](Recipe& r, const std::string& s) {
                   r.bce_style = enum_value(kBceStyleNames, s);
                 }});
    f.push_back({"loss.kind",
                 [](const Recipe& r) { return enum_name(kLossNames, r.loss); },
                 [](Recipe& r, const std::string& s) {
                   r.loss = enum_value(kLossNames, s);
                 }});
    dbl("mix.apply_prob", &Recipe::mix_apply_prob);
    f.push_back({"mix.mode",
                 [](const Recipe& r) { return enum_name(kMixModeNames, r.mix_mode); },
                 [](Recipe& r, const std::string& s) {
                   r.mix_mode = enum_value(kMixModeNames, s);
                 }});
    dbl("mix.switch_prob", &Recipe::mix_switch_prob);
    dbl("mixup_alpha", &Recipe::mixup_alpha);
    f.push_back({"name", [](const Recipe& r) { return r.name; },
                 [](Recipe& r, const std::string& s) { r.name = s; }});
    dbl("optimizer.adamp_delta", &Recipe::adamp_delta);
    dbl("optimizer.adamp_wd_ratio", &Recipe::adamp_wd_ratio);
    dbl("optimizer.beta1", &Recipe::beta1);
    dbl("optimizer.beta2", &Recipe::beta2);
    dbl("optimizer.eps", &Recipe::opt_eps);
    f.push_back({"optimizer.kind",
                 [](const Recipe& r) { return enum_name(kOptimizerNames, r.optimizer); },
                 [](Recipe& r, const std::string& s) {
                   r.optimizer = enum_value(kOptimizerNames, s);
                 }});
    dbl("optimizer.lr", &Recipe::lr);
    dbl("optimizer.momentum", &Recipe::momentum);
    dbl("optimizer.rho", &Recipe::rho);
    dbl("optimizer.trust_clip", &Recipe::trust_clip);
    dbl("optimizer.weight_decay", &Recipe::weight_decay);
    u32("random_erasing.count", &Recipe::erase_count);
    dbl("random_erasing.prob", &Recipe::erase_prob);
    boolean("randaugment.enabled", &Recipe::randaugment);
    dbl("randaugment.magnitude", &Recipe::ra_magnitude);
    // mstd is a float with a 'uniform' sentinel.
    f.push_back({"randaugment.mstd",
                 [](const Recipe& r) {
                   return r.ra_mstd_uniform ? std::string("uniform")
                                            : fmt_double(r.ra_mstd);
                 },
                 [](Recipe& r, const std::string& s) {
                   if (s == "uniform") {
                     r.ra_mstd_uniform = true;
                     r.ra_mstd = 0.0;
                   } else {
                     r.ra_mstd_uniform = false;
                     r.ra_mstd = parse_double(s);
                   }
                 }});
    u32("randaugment.num_ops", &Recipe::ra_num_ops);
    u32("reference_batch_size", &Recipe::reference_batch_size);
    boolean("repeated_aug.enabled", &Recipe::repeated_aug);
    u32("repeated_aug.m", &Recipe::ra_repeats);
    boolean("scale_lr_for_batch", &Recipe::scale_lr_for_batch);
    f.push_back({"schedule.kind",
                 [](const Recipe& r) { return enum_name(kScheduleNames, r.schedule); },
                 [](Recipe& r, const std::string& s) {
                   r.schedule = enum_value(kScheduleNames, s);
                 }});
    dbl("schedule.min_lr", &Recipe::min_lr);
    boolean("schedule.noise.enabled", &Recipe::noise_enabled);
    dbl("schedule.noise.hi", &Recipe::noise_hi);
    dbl("schedule.noise.lo", &Recipe::noise_lo);
    u64("schedule.noise.seed", &Recipe::noise_seed);
    dbl("schedule.noise.std", &Recipe::noise_std);
    dbl("schedule.step_decay_rate", &Recipe::step_decay_rate);
    dbl("schedule.step_interval_epochs", &Recipe::step_interval_epochs);
    dbl("schedule.warmup_epochs", &Recipe::warmup_epochs);
    dbl("schedule.waterfall_factor", &Recipe::waterfall_factor);
    f.push_back({"schedule.waterfall_milestones",
                 [](const Recipe& r) { return fmt_milestones(r.waterfall_milestones); },
                 [](Recipe& r, const std::string& s) {
                   r.waterfall_milestones = parse_milestones(s);
                 }});
    u64("seed", &Recipe::seed);
    dbl("smoothing", &Recipe::smoothing);
    dbl("test_crop_ratio", &Recipe::test_crop_ratio);
    u32("test_res", &Recipe::test_res);
    u32("train_res", &Recipe::train_res);

    std::sort(f.begin(), f.end(),
              [](const Field& a, const Field& b) {
                return std::string_view(a.key) < std::string_view(b.key);
              });
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"a1", "a2", "a3", "b",
                                                 "c1", "c2", "d",
                                                 "pytorch-baseline"};
  return names;
}

Recipe preset(const std::string& name) {
  Recipe r;
  r.name = name;
  if (name == "a1" || name == "a2" || name == "a3") {
    r.train_res = name == "a3" ? 160 : 224;
    r.test_res = 224;
    r.epochs = name == "a1" ? 600 : (name == "a2" ? 300 : 100);
    r.batch_size = r.reference_batch_size = 2048;
    r.optimizer = OptimizerKind::Lamb;
    r.lr = name == "a3" ? 8e-3 : 5e-3;
    r.weight_decay = name == "a1" ? 0.01 : 0.02;
    r.opt_eps = 1e-6;
    r.schedule = ScheduleKind::Cosine;
    r.warmup_epochs = 5.0;
    r.loss = LossKind::Bce;
    r.bce_style = BceStyle::Multilabel;
    r.smoothing = name == "a1" ? 0.1 : 0.0;
    r.dropout = 0.0;
    r.drop_path = name == "a3" ? 0.0 : 0.05;
    r.repeated_aug = name != "a3";
    r.randaugment = true;
    r.ra_magnitude = name == "a3" ? 6.0 : 7.0;
    r.ra_num_ops = 2;
    r.ra_mstd = 0.5;
    r.mixup_alpha = name == "a1" ? 0.2 : 0.1;
    r.cutmix_alpha = 1.0;
    r.erase_prob = 0.0;
    r.test_crop_ratio = 0.95;
  } else if (name == "b") {
    r.train_res = r.test_res = 224;
    r.epochs = 600;
    r.batch_size = r.reference_batch_size = 2048;
    r.optimizer = OptimizerKind::RmspropTf;
    r.lr = 0.18;
    r.weight_decay = 7e-6;
    r.opt_eps = 1e-3;
    r.rho = 0.9;
    r.momentum = 0.9;
    r.schedule = ScheduleKind::Step;
    r.step_decay_rate = 0.988;
    r.step_interval_epochs = 1.0;
    r.warmup_epochs = 5.0;
    r.noise_enabled = true;
    r.noise_lo = 0.45;
    r.noise_hi = 1.0;
    r.noise_std = 0.67;
    r.loss = LossKind::Ce;
    r.smoothing = 0.1;
    r.dropout = 0.2;
    r.drop_path = 0.1;
    r.randaugment = true;
    r.ra_magnitude = 8.0;
    r.ra_num_ops = 2;
    r.ra_mstd = 1.0;
    r.mixup_alpha = 0.2;
    r.cutmix_alpha = 0.0;
    r.erase_prob = 0.35;
    r.erase_count = 3;
    r.ema = true;
    r.ema_decay = 0.9999;
    r.test_crop_ratio = 0.95;
  } else if (name == "c1" || name == "c2") {
    r.train_res = r.test_res = 224;
    r.epochs = 800;
    r.batch_size = r.reference_batch_size = 2048;
    r.optimizer = OptimizerKind::SgdNesterov;
    r.lr = 0.88;
    r.weight_decay = 1e-5;
    r.momentum = 0.9;
    r.schedule = ScheduleKind::Cosine;
    r.warmup_epochs = 5.0;
    r.loss = LossKind::Ce;
    r.smoothing = 0.1;
    r.dropout = 0.25;
    r.drop_path = 0.1;
    r.repeated_aug = name == "c2";
    r.grad_clip = GradClipKind::Agc;
    r.agc_lambda = name == "c1" ? 0.025 : 0.05;
    r.randaugment = true;
    r.ra_magnitude = 7.0;
    r.ra_num_ops = 3;
    r.ra_mstd = 1.0;
    r.mixup_alpha = 0.2;
    r.cutmix_alpha = 1.0;
    r.erase_prob = 0.4;
    r.erase_count = 1;
    r.test_crop_ratio = 0.95;
  } else if (name == "d") {
    r.train_res = r.test_res = 224;
    r.epochs = 600;
    r.batch_size = r.reference_batch_size = 384;
    r.optimizer = OptimizerKind::AdamP;
    r.lr = 0.0033;
    r.weight_decay = 0.01;
    r.opt_eps = 1e-8;
    r.schedule = ScheduleKind::Cosine;
    r.warmup_epochs = 5.0;
    r.loss = LossKind::Bce;
    r.bce_style = BceStyle::Multilabel;
    r.smoothing = 0.1;
    r.dropout = 0.1;
    r.drop_path = 0.05;
    r.randaugment = true;
    r.ra_magnitude = 7.0;
    r.ra_num_ops = 3;
    r.ra_mstd = 1.0;
    r.mixup_alpha = 0.2;
    r.cutmix_alpha = 1.0;
    r.erase_prob = 0.35;
    r.erase_count = 1;
    r.test_crop_ratio = 0.95;
  } else if (name == "pytorch-baseline") {
    r.train_res = r.test_res = 224;
    r.epochs = 90;
    r.batch_size = r.reference_batch_size = 256;
    r.optimizer = OptimizerKind::SgdNesterov;
    r.lr = 0.1;
    r.weight_decay = 1e-4;
    r.momentum = 0.9;
    r.schedule = ScheduleKind::Waterfall;
    r.waterfall_factor = 0.1;
    r.waterfall_milestones = {30.0, 60.0};
    r.warmup_epochs = 0.0;
    r.loss = LossKind::Ce;
    r.smoothing = 0.0;
    r.randaugment = false;
    r.ra_magnitude = 0.0;
    r.ra_num_ops = 1;
    r.ra_mstd = 0.0;
    r.mixup_alpha = 0.0;
    r.cutmix_alpha = 0.0;
    r.test_crop_ratio = 0.875;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  r.min_lr = 1e-6 * r.lr;
  return r;
}

void apply_config(Recipe& recipe, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* field = find_field(key);
    if (field == nullptr) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    try {
      field->set(recipe, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ", key '" +
                        key + "': " + e.what());
    }
  }
}

std::string serialize(const Recipe& recipe) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(recipe);
    out += '\n';
  }
  return out;
}

std::vector<std::string> validate(const Recipe& r) {
  std::vector<std::string> v;
  auto check = [&v](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };
  check(r.batch_size >= 1, "batch_size must be >= 1");
  check(r.train_res >= 1 && r.test_res >= 1, "resolutions must be >= 1");
  check(r.lr > 0.0, "optimizer.lr must be positive");
  check(r.weight_decay >= 0.0, "optimizer.weight_decay must be >= 0");
  check(r.beta1 >= 0.0 && r.beta1 < 1.0, "optimizer.beta1 outside [0,1)");
  check(r.beta2 >= 0.0 && r.beta2 < 1.0, "optimizer.beta2 outside [0,1)");
  check(r.momentum >= 0.0 && r.momentum < 1.0, "optimizer.momentum outside [0,1)");
  check(r.rho > 0.0 && r.rho < 1.0, "optimizer.rho outside (0,1)");
  check(r.trust_clip >= 0.0, "optimizer.trust_clip must be >= 0");
  check(r.warmup_epochs >= 0.0 && r.warmup_epochs <= r.epochs,
        "schedule.warmup_epochs outside [0, epochs]");
  check(r.min_lr >= 0.0, "schedule.min_lr must be >= 0");
  check(r.step_decay_rate > 0.0 && r.step_decay_rate <= 1.0,
        "schedule.step_decay_rate outside (0,1]");
  check(r.step_interval_epochs > 0.0, "schedule.step_interval_epochs must be positive");
  check(r.waterfall_factor > 0.0 && r.waterfall_factor <= 1.0,
        "schedule.waterfall_factor outside (0,1]");
  check(r.noise_lo >= 0.0 && r.noise_hi <= 1.0 && r.noise_lo <= r.noise_hi,
        "schedule.noise range must lie inside [0,1]");
  check(r.noise_std >= 0.0, "schedule.noise.std must be >= 0");
  check(r.smoothing >= 0.0 && r.smoothing < 0.5, "smoothing outside [0, 0.5)");
  check(r.dropout >= 0.0 && r.dropout < 1.0, "dropout outside [0,1)");
  check(r.drop_path >= 0.0 && r.drop_path < 1.0, "drop_path outside [0,1)");
  if (r.repeated_aug) {
    check(r.ra_repeats >= 1, "repeated_aug.m must be >= 1");
    check(r.ra_repeats >= 1 && r.batch_size % r.ra_repeats == 0,
          "batch not divisible by repeats");
  }
  if (r.grad_clip == GradClipKind::Agc) {
    check(r.agc_lambda > 0.0, "grad_clip.agc_lambda must be positive");
    check(r.agc_eps > 0.0, "grad_clip.agc_eps must be positive");
  }
  if (r.randaugment) {
    check(r.ra_magnitude >= 0.0 && r.ra_magnitude <= 10.0,
          "randaugment.magnitude outside [0,10]");
    check(r.ra_num_ops >= 1, "randaugment.num_ops must be >= 1");
    check(r.ra_mstd >= 0.0, "randaugment.mstd must be >= 0");
  }
  check(r.mixup_alpha >= 0.0, "mixup_alpha must be >= 0");
  check(r.cutmix_alpha >= 0.0, "cutmix_alpha must be >= 0");
  check(r.mix_switch_prob >= 0.0 && r.mix_switch_prob <= 1.0,
        "mix.switch_prob outside [0,1]");
  check(r.mix_apply_prob >= 0.0 && r.mix_apply_prob <= 1.0,
        "mix.apply_prob outside [0,1]");
  if (r.mix_mode == MixMode::Half) {
    check(r.batch_size % 2 == 0, "half mix mode requires an even batch");
  }
  check(r.erase_prob >= 0.0 && r.erase_prob <= 1.0,
        "random_erasing.prob outside [0,1]");
  check(r.erase_count >= 1, "random_erasing.count must be >= 1");
  if (r.ema) check(r.ema_decay >= 0.0 && r.ema_decay < 1.0, "ema.decay outside [0,1)");
  check(r.test_crop_ratio > 0.0 && r.test_crop_ratio <= 1.0,
        "test_crop_ratio outside (0,1]");
  if (r.loss == LossKind::Bce && r.bce_style == BceStyle::Normalized &&
      r.smoothing > 0.0) {
    v.push_back("smoothing with normalized BCE targets is not supported");
  }
  check(r.reference_batch_size >= 1, "reference_batch_size must be >= 1");
  return v;
}

void validate_or_throw(const Recipe& recipe) {
  const auto violations = validate(recipe);
  if (violations.empty()) return;
  std::string msg = "invalid recipe '" + recipe.name + "':";
  for (const auto& s : violations) msg += "\n  - " + s;
  throw ConfigError(msg);
}

double effective_lr(const Recipe& r) {
  if (!r.scale_lr_for_batch || r.batch_size == r.reference_batch_size) {
    return r.lr;
  }
  const double ratio = static_cast<double>(r.batch_size) /
                       static_cast<double>(r.reference_batch_size);
  // Square-root scaling for AdamP, linear for the others.
  return r.optimizer == OptimizerKind::AdamP ? r.lr * std::sqrt(ratio)
                                             : r.lr * ratio;
}

ScheduleConfig schedule_config(const Recipe& r) {
  ScheduleConfig cfg;
  cfg.base_lr = effective_lr(r);
  cfg.min_lr = r.min_lr;
  cfg.warmup_epochs = r.warmup_epochs;
  cfg.total_epochs = r.epochs;
  cfg.kind = r.schedule;
  cfg.step_decay_rate = r.step_decay_rate;
  cfg.step_interval_epochs = r.step_interval_epochs;
  cfg.waterfall_factor = r.waterfall_factor;
  cfg.waterfall_milestones = r.waterfall_milestones;
  cfg.noise.enabled = r.noise_enabled;
  cfg.noise.active_lo = r.noise_lo;
  cfg.noise.active_hi = r.noise_hi;
  cfg.noise.stddev = r.noise_std;
  cfg.noise.seed = r.noise_seed;
  return cfg;
}

MixConfig mix_config(const Recipe& r) {
  MixConfig cfg;
  cfg.mixup_alpha = r.mixup_alpha;
  cfg.cutmix_alpha = r.cutmix_alpha;
  cfg.switch_prob = r.mix_switch_prob;
  cfg.apply_prob = r.mix_apply_prob;
  cfg.mode = r.mix_mode;
  return cfg;
}

RandAugmentConfig randaugment_config(const Recipe& r,
                                     std::vector<double> fill) {
  RandAugmentConfig cfg;
  cfg.magnitude = r.ra_magnitude;
  cfg.num_ops = static_cast<int>(r.ra_num_ops);
  cfg.mstd = r.ra_mstd;
  cfg.uniform_mstd = r.ra_mstd_uniform;
  cfg.increasing = true;
  cfg.fill = std::move(fill);
  return cfg;
}

RandomErasingConfig erasing_config(const Recipe& r) {
  RandomErasingConfig cfg;
  cfg.probability = r.erase_prob;
  cfg.count = static_cast<int>(r.erase_count);
  cfg.mode = EraseMode::PerPixelNoise;
  return cfg;
}

const char* optimizer_kind_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Lamb: return "lamb";
    case OptimizerKind::SgdNesterov: return "sgd_nesterov";
    case OptimizerKind::RmspropTf: return "rmsprop_tf";
    case OptimizerKind::AdamP: return "adamp";
  }
  return "?";
}

}  // namespace rsb
