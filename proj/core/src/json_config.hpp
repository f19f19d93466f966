#pragma once

// JSON conversions for the configuration structs, shared by checkpoint
// headers and the experiment config file.

#include <json.hpp>

#include "dshgan/gan.hpp"
#include "dshgan/hashmodel.hpp"
#include "dshgan/trainer.hpp"

namespace dshgan::detail {

nlohmann::json to_json(const ImageShape& s);
ImageShape image_shape_from_json(const nlohmann::json& j);

std::string to_string(LabelMode mode);
LabelMode label_mode_from_string(const std::string& s);

nlohmann::json to_json(const TrunkConfig& c);
nlohmann::json to_json(const GeneratorConfig& c);
nlohmann::json to_json(const GanConfig& c);
nlohmann::json to_json(const HashModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);

// The *_from_json readers start from `base`, overwrite keys present in `j`,
// and throw a configuration error naming `where.key` for unknown keys.
TrunkConfig trunk_from_json(const nlohmann::json& j, TrunkConfig base, const std::string& where);
GeneratorConfig generator_from_json(const nlohmann::json& j, GeneratorConfig base,
                                    const std::string& where);
GanConfig gan_from_json(const nlohmann::json& j, GanConfig base, const std::string& where);
HashModelConfig hash_model_from_json(const nlohmann::json& j, HashModelConfig base,
                                     const std::string& where);
TrainConfig train_from_json(const nlohmann::json& j, TrainConfig base, const std::string& where);

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where);

}  // namespace dshgan::detail
