#include "djsr/config_json.hpp"

#include <sstream>

namespace djsr {

void check_known_keys(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where) {
    if (!j.is_object()) fail(ErrorKind::format, std::string(where) + ": expected an object");
    for (const auto& item : j.items()) {
        bool found = false;
        for (const char* k : known) found = found || item.key() == k;
        if (!found) fail(ErrorKind::format, std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

void to_json(nlohmann::json& j, const LayerSpec& spec) {
    j = nlohmann::json{{"kernel", spec.kernel}, {"channels", spec.channels}};
}

void from_json(const nlohmann::json& j, LayerSpec& spec) {
    check_known_keys(j, {"kernel", "channels"}, "layer");
    spec.kernel = j.value("kernel", spec.kernel);
    spec.channels = j.value("channels", spec.channels);
}

void to_json(nlohmann::json& j, const SdcaeConfig& c) {
    j = nlohmann::json{{"layers", c.layers},
                       {"corruption_sigma", c.corruption_sigma},
                       {"scale", c.scale},
                       {"learning_rate", c.learning_rate},
                       {"momentum", c.momentum},
                       {"epochs", c.epochs},
                       {"batch_size", c.batch_size},
                       {"seed", c.seed},
                       {"sub_image", c.sub_image},
                       {"sub_image_stride", c.sub_image_stride},
                       {"augmentations", c.augmentations},
                       {"norm_floor", c.norm_floor},
                       {"init", to_string(c.init)},
                       {"init_noise", c.init_noise}};
}

void from_json(const nlohmann::json& j, SdcaeConfig& c) {
    check_known_keys(j,
                     {"layers", "corruption_sigma", "scale", "learning_rate", "momentum", "epochs", "batch_size",
                      "seed", "sub_image", "sub_image_stride", "augmentations", "norm_floor", "init", "init_noise"},
                     "sdcae");
    if (j.contains("layers")) c.layers = j.at("layers").get<std::vector<LayerSpec>>();
    c.corruption_sigma = j.value("corruption_sigma", c.corruption_sigma);
    c.scale = j.value("scale", c.scale);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.sub_image = j.value("sub_image", c.sub_image);
    c.sub_image_stride = j.value("sub_image_stride", c.sub_image_stride);
    c.augmentations = j.value("augmentations", c.augmentations);
    c.norm_floor = j.value("norm_floor", c.norm_floor);
    if (j.contains("init")) c.init = init_scheme_from_string(j.at("init").get<std::string>());
    c.init_noise = j.value("init_noise", c.init_noise);
}

std::vector<LayerSpec> parse_layer_specs(const std::string& text) {
    std::vector<LayerSpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int kh = 0, kw = 0, ch = 0;
        char x1 = 0, x2 = 0;
        std::stringstream is(item);
        if (!(is >> kh >> x1 >> kw >> x2 >> ch) || x1 != 'x' || x2 != 'x' || kh != kw)
            fail(ErrorKind::invalid_argument,
                 "layer spec '" + item + "' is not of the form KxKxC (square kernels)");
        out.push_back({kh, ch});
    }
    if (out.empty()) fail(ErrorKind::invalid_argument, "empty layer spec list");
    return out;
}

std::string format_layer_specs(const std::vector<LayerSpec>& layers) {
    std::string out;
    for (const LayerSpec& l : layers) {
        if (!out.empty()) out += ",";
        out += std::to_string(l.kernel) + "x" + std::to_string(l.kernel) + "x" + std::to_string(l.channels);
    }
    return out;
}

}  // namespace djsr
