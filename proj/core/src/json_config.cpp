#include "json_config.hpp"

#include <algorithm>
#include <type_traits>

#include "dshgan/errors.hpp"

namespace dshgan::detail {

using nlohmann::json;

namespace {

std::string key_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  const std::string path = key_path(where, key);
  if constexpr (std::is_same_v<T, bool>) {
    require(v.is_boolean(), ErrorKind::kConfiguration, path + " must be a boolean");
    out = v.get<bool>();
  } else if constexpr (std::is_unsigned_v<T>) {
    require(v.is_number_unsigned(), ErrorKind::kConfiguration,
            path + " must be a non-negative integer");
    out = v.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    require(v.is_number(), ErrorKind::kConfiguration, path + " must be a number");
    out = v.get<T>();
  } else {
    require(v.is_string(), ErrorKind::kConfiguration, path + " must be a string");
    out = v.get<T>();
  }
}

void require_object(const json& j, const std::string& where) {
  require(j.is_object(), ErrorKind::kConfiguration,
          (where.empty() ? std::string("config") : where) + " must be a JSON object");
}

std::string to_string(GeneratorLoss loss) {
  return loss == GeneratorLoss::kMinimax ? "minimax" : "non_saturating";
}

GeneratorLoss generator_loss_from_string(const std::string& s, const std::string& where) {
  if (s == "minimax") return GeneratorLoss::kMinimax;
  if (s == "non_saturating") return GeneratorLoss::kNonSaturating;
  fail(ErrorKind::kConfiguration, where + ": unknown generator loss '" + s + "'");
}

}  // namespace

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    require(known, ErrorKind::kConfiguration, "unknown configuration key '" + key_path(where, key) + "'");
  }
}

json to_json(const ImageShape& s) {
  return json{{"channels", s.channels}, {"height", s.height}, {"width", s.width}};
}

ImageShape image_shape_from_json(const json& j) {
  check_keys(j, {"channels", "height", "width"}, "image_shape");
  ImageShape s;
  read(j, "channels", s.channels, "image_shape");
  read(j, "height", s.height, "image_shape");
  read(j, "width", s.width, "image_shape");
  return s;
}

std::string to_string(LabelMode mode) { return mode == LabelMode::kSingle ? "single" : "multi"; }

LabelMode label_mode_from_string(const std::string& s) {
  if (s == "single") return LabelMode::kSingle;
  if (s == "multi") return LabelMode::kMulti;
  fail(ErrorKind::kConfiguration, "unknown label mode '" + s + "'");
}

json to_json(const TrunkConfig& c) {
  return json{{"channels", c.channels},
              {"feature_width", c.feature_width},
              {"leaky_slope", c.leaky_slope},
              {"init_std", c.init_std}};
}

json to_json(const GeneratorConfig& c) {
  return json{{"noise_dim", c.noise_dim},
              {"width", c.width},
              {"leaky_slope", c.leaky_slope},
              {"init_std", c.init_std}};
}

json to_json(const GanConfig& c) {
  return json{{"image_shape", to_json(c.image_shape)},
              {"class_count", c.class_count},
              {"label_mode", to_string(c.label_mode)},
              {"generator", to_json(c.generator)},
              {"discriminator", to_json(c.discriminator)},
              {"iterations", c.iterations},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"real_class_weight", c.real_class_weight},
              {"synthetic_class_weight", c.synthetic_class_weight},
              {"generator_loss", to_string(c.generator_loss)},
              {"labeled_real_fraction", c.labeled_real_fraction}};
}

json to_json(const HashModelConfig& c) {
  return json{{"image_shape", to_json(c.image_shape)},
              {"class_count", c.class_count},
              {"label_mode", to_string(c.label_mode)},
              {"code_length", c.code_length},
              {"trunk", to_json(c.trunk)}};
}

json to_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"weight_decay", c.weight_decay},
              {"batch_size", c.batch_size},
              {"iterations", c.iterations},
              {"lr_decay_step", c.lr_decay_step},
              {"lr_decay_factor", c.lr_decay_factor},
              {"update_ratio", c.update_ratio},
              {"synthetic_fraction", c.synthetic_fraction},
              {"seed", c.seed},
              {"weights",
               {{"triplet", c.weights.triplet},
                {"adversary", c.weights.adversary},
                {"classification", c.weights.classification}}},
              {"update_generator", c.update_generator},
              {"generator_lr_scale", c.generator_lr_scale}};
}

TrunkConfig trunk_from_json(const json& j, TrunkConfig base, const std::string& where) {
  check_keys(j, {"channels", "feature_width", "leaky_slope", "init_std"}, where);
  if (j.contains("channels")) {
    const json& ch = j.at("channels");
    require(ch.is_array() && ch.size() == 3 &&
                std::all_of(ch.begin(), ch.end(), [](const json& v) { return v.is_number_unsigned(); }),
            ErrorKind::kConfiguration, key_path(where, "channels") + " must hold three channel counts");
    for (std::size_t i = 0; i < 3; ++i) base.channels[i] = ch[i].get<std::size_t>();
  }
  read(j, "feature_width", base.feature_width, where);
  read(j, "leaky_slope", base.leaky_slope, where);
  read(j, "init_std", base.init_std, where);
  return base;
}

GeneratorConfig generator_from_json(const json& j, GeneratorConfig base, const std::string& where) {
  check_keys(j, {"noise_dim", "width", "leaky_slope", "init_std"}, where);
  read(j, "noise_dim", base.noise_dim, where);
  read(j, "width", base.width, where);
  read(j, "leaky_slope", base.leaky_slope, where);
  read(j, "init_std", base.init_std, where);
  return base;
}

GanConfig gan_from_json(const json& j, GanConfig base, const std::string& where) {
  check_keys(j,
             {"image_shape", "class_count", "label_mode", "generator", "discriminator", "iterations",
              "batch_size", "learning_rate", "beta1", "beta2", "real_class_weight",
              "synthetic_class_weight", "generator_loss", "labeled_real_fraction"},
             where);
  if (j.contains("image_shape")) base.image_shape = image_shape_from_json(j.at("image_shape"));
  read(j, "class_count", base.class_count, where);
  if (j.contains("label_mode")) {
    std::string s;
    read(j, "label_mode", s, where);
    base.label_mode = label_mode_from_string(s);
  }
  if (j.contains("generator"))
    base.generator = generator_from_json(j.at("generator"), base.generator, key_path(where, "generator"));
  if (j.contains("discriminator"))
    base.discriminator =
        trunk_from_json(j.at("discriminator"), base.discriminator, key_path(where, "discriminator"));
  read(j, "iterations", base.iterations, where);
  read(j, "batch_size", base.batch_size, where);
  read(j, "learning_rate", base.learning_rate, where);
  read(j, "beta1", base.beta1, where);
  read(j, "beta2", base.beta2, where);
  read(j, "real_class_weight", base.real_class_weight, where);
  read(j, "synthetic_class_weight", base.synthetic_class_weight, where);
  read(j, "labeled_real_fraction", base.labeled_real_fraction, where);
  if (j.contains("generator_loss")) {
    std::string s;
    read(j, "generator_loss", s, where);
    base.generator_loss = generator_loss_from_string(s, key_path(where, "generator_loss"));
  }
  return base;
}

HashModelConfig hash_model_from_json(const json& j, HashModelConfig base, const std::string& where) {
  check_keys(j, {"image_shape", "class_count", "label_mode", "code_length", "trunk"}, where);
  if (j.contains("image_shape")) base.image_shape = image_shape_from_json(j.at("image_shape"));
  read(j, "class_count", base.class_count, where);
  if (j.contains("label_mode")) {
    std::string s;
    read(j, "label_mode", s, where);
    base.label_mode = label_mode_from_string(s);
  }
  read(j, "code_length", base.code_length, where);
  if (j.contains("trunk")) base.trunk = trunk_from_json(j.at("trunk"), base.trunk, key_path(where, "trunk"));
  return base;
}

TrainConfig train_from_json(const json& j, TrainConfig base, const std::string& where) {
  check_keys(j,
             {"learning_rate", "momentum", "weight_decay", "batch_size", "iterations", "lr_decay_step",
              "lr_decay_factor", "update_ratio", "synthetic_fraction", "seed", "weights",
              "update_generator", "generator_lr_scale"},
             where);
  read(j, "learning_rate", base.learning_rate, where);
  read(j, "momentum", base.momentum, where);
  read(j, "weight_decay", base.weight_decay, where);
  read(j, "batch_size", base.batch_size, where);
  read(j, "iterations", base.iterations, where);
  read(j, "lr_decay_step", base.lr_decay_step, where);
  read(j, "lr_decay_factor", base.lr_decay_factor, where);
  read(j, "update_ratio", base.update_ratio, where);
  read(j, "synthetic_fraction", base.synthetic_fraction, where);
  read(j, "seed", base.seed, where);
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    const std::string wp = key_path(where, "weights");
    check_keys(w, {"triplet", "adversary", "classification"}, wp);
    read(w, "triplet", base.weights.triplet, wp);
    read(w, "adversary", base.weights.adversary, wp);
    read(w, "classification", base.weights.classification, wp);
  }
  read(j, "update_generator", base.update_generator, where);
  read(j, "generator_lr_scale", base.generator_lr_scale, where);
  return base;
}

}  // namespace dshgan::detail
