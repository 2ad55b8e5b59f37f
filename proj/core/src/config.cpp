#include "stabcode/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stabcode {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed,
                  const std::set<std::string>& required) {
    if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
    }
    for (const auto& key : required) {
        if (!obj.contains(key))
            throw std::invalid_argument("config: missing key \"" + key + "\" in " + where);
    }
}

std::vector<double> coefs(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument("config: " + where + " must be a non-empty array");
    std::vector<double> out;
    for (const auto& v : arr) {
        if (!v.is_number()) throw std::invalid_argument("config: " + where + " must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

TransferFunction parse_tf(const json& obj, const std::string& where) {
    require_keys(obj, where, {"num", "den"}, {"num", "den"});
    return TransferFunction(coefs(obj["num"], where + ".num"), coefs(obj["den"], where + ".den"));
}

StabilizingCodeSpec parse_code(const json& obj) {
    require_keys(obj, "codes[]",
                 {"name", "kind", "k", "k_prime", "delta", "r", "beta", "sigma_v2", "psi"},
                 {"name", "kind", "k", "delta", "beta", "sigma_v2"});
    const std::string name = obj["name"].get<std::string>();
    const std::string kind = obj["kind"].get<std::string>();
    const int k = obj["k"].get<int>();
    const double delta = obj["delta"].get<double>();
    const double beta = obj["beta"].get<double>();
    const double sigma_v2 = obj["sigma_v2"].get<double>();
    if (kind == "independent") {
        const int kp = obj.contains("k_prime") ? obj["k_prime"].get<int>() : 1;
        return make_independent_code(name, k, kp, delta, beta, sigma_v2);
    }
    if (kind == "repetition") {
        if (obj.contains("k_prime") && obj["k_prime"].get<int>() != 1)
            throw std::invalid_argument("config: repetition codes have k_prime = 1");
        return make_repetition_code(name, k, delta, beta, sigma_v2);
    }
    if (kind == "md") {
        if (!obj.contains("r")) throw std::invalid_argument("config: md code needs \"r\"");
        const int kp = obj.contains("k_prime") ? obj["k_prime"].get<int>() : 1;
        const double psi = obj.contains("psi") ? obj["psi"].get<double>() : 0.0;
        return make_md_code(name, k, kp, delta, obj["r"].get<int>(), beta, sigma_v2, psi);
    }
    throw std::invalid_argument("config: unknown code kind \"" + kind + "\"");
}

ArtifactConfig parse_json(const json& root) {
    require_keys(root, "top level", {"plant", "filters", "loop", "codes", "channel", "sim"},
                 {"plant", "filters", "loop"});
    ArtifactConfig cfg;

    const json& plant = root["plant"];
    if (plant.contains("p")) {
        require_keys(plant, "plant", {"p"}, {"p"});
        const TransferFunction p = parse_tf(plant["p"], "plant.p");
        cfg.loop.plant = PlantBlocks{p, p, p, p};
    } else {
        require_keys(plant, "plant", {"p11", "p12", "p21", "p22"}, {"p11", "p12", "p21", "p22"});
        cfg.loop.plant.p11 = parse_tf(plant["p11"], "plant.p11");
        cfg.loop.plant.p12 = parse_tf(plant["p12"], "plant.p12");
        cfg.loop.plant.p21 = parse_tf(plant["p21"], "plant.p21");
        cfg.loop.plant.p22 = parse_tf(plant["p22"], "plant.p22");
    }

    const json& filters = root["filters"];
    require_keys(filters, "filters", {"f", "l_y", "l_w"}, {"f", "l_y"});
    cfg.loop.F = parse_tf(filters["f"], "filters.f");
    cfg.loop.L_y = parse_tf(filters["l_y"], "filters.l_y");
    cfg.loop.L_w = filters.contains("l_w") ? parse_tf(filters["l_w"], "filters.l_w") : TransferFunction();

    const json& loop = root["loop"];
    require_keys(loop, "loop", {"sigma_q2", "beta"}, {"sigma_q2", "beta"});
    cfg.loop.sigma_q2 = loop["sigma_q2"].get<double>();
    cfg.loop.beta = loop["beta"].get<double>();
    if (!(cfg.loop.sigma_q2 > 0.0) || !(cfg.loop.beta > 0.0))
        throw std::invalid_argument("config: loop.sigma_q2 and loop.beta must be positive");

    if (root.contains("codes")) {
        if (!root["codes"].is_array()) throw std::invalid_argument("config: codes must be an array");
        std::set<std::string> names;
        for (const auto& c : root["codes"]) {
            cfg.codes.push_back(parse_code(c));
            if (!names.insert(cfg.codes.back().name).second)
                throw std::invalid_argument("config: duplicate code name \"" + cfg.codes.back().name + "\"");
        }
    }

    if (root.contains("channel")) {
        require_keys(root["channel"], "channel", {"p_loss"}, {"p_loss"});
        cfg.p_loss = root["channel"]["p_loss"].get<double>();
        if (cfg.p_loss < 0.0 || cfg.p_loss > 1.0)
            throw std::invalid_argument("config: channel.p_loss must lie in [0, 1]");
    }

    if (root.contains("sim")) {
        const json& sim = root["sim"];
        require_keys(sim, "sim", {"horizon", "seed", "warmup", "decoder_on_empty", "coder"}, {});
        if (sim.contains("horizon")) cfg.sim.horizon = sim["horizon"].get<std::int64_t>();
        if (sim.contains("seed")) cfg.sim.seed = sim["seed"].get<std::uint64_t>();
        if (sim.contains("warmup")) cfg.sim.warmup = sim["warmup"].get<std::int64_t>();
        if (cfg.sim.horizon < 1) throw std::invalid_argument("config: sim.horizon must be >= 1");
        if (cfg.sim.warmup < 0 || cfg.sim.warmup >= cfg.sim.horizon)
            throw std::invalid_argument("config: sim.warmup must lie in [0, horizon)");
        if (sim.contains("decoder_on_empty")) {
            const std::string p = sim["decoder_on_empty"].get<std::string>();
            if (p == "zero")
                cfg.sim.on_empty = EmptyPolicy::zero;
            else if (p == "mean")
                cfg.sim.on_empty = EmptyPolicy::mean;
            else if (p == "hold")
                cfg.sim.on_empty = EmptyPolicy::hold;
            else
                throw std::invalid_argument("config: unknown decoder_on_empty \"" + p + "\"");
        }
        if (sim.contains("coder")) {
            const std::string c = sim["coder"].get<std::string>();
            if (c == "entropy_measure")
                cfg.sim.coder = CoderKind::entropy_measure;
            else if (c == "huffman_stream")
                cfg.sim.coder = CoderKind::huffman_stream;
            else if (c == "gaussian_designed")
                cfg.sim.coder = CoderKind::gaussian_designed;
            else
                throw std::invalid_argument("config: unknown coder \"" + c + "\"");
        }
    }
    return cfg;
}

constexpr const char* kDefaultJson = R"json({
  "plant": {
    "p": {"num": [0.0, 0.0, 0.165], "den": [1.0, -4.5789, 2.3156]}
  },
  "filters": {
    "f": {"num": [1.0], "den": [1.0]},
    "l_y": {
      "num": [-88.63636363636364, 95.62977272727273, -25.655795454545457],
      "den": [1.0, -0.35, 0.025]
    },
    "l_w": {
      "num": [-3.5, 1.85],
      "den": [1.0, -0.35, 0.025]
    }
  },
  "loop": {"sigma_q2": 6.3, "beta": 0.35206706678159377},
  "codes": [
    {"name": "single", "kind": "independent", "k": 1, "k_prime": 1,
     "delta": 3.4641016151377544, "beta": 0.69393873602490841, "sigma_v2": 133.0},
    {"name": "ind21", "kind": "independent", "k": 2, "k_prime": 1,
     "delta": 4.0, "beta": 0.6922845292954134, "sigma_v2": 127.0},
    {"name": "ind32", "kind": "independent", "k": 3, "k_prime": 2,
     "delta": 7.0, "beta": 0.39483233371423659, "sigma_v2": 60.0},
    {"name": "rep21", "kind": "repetition", "k": 2,
     "delta": 4.0, "beta": 0.65902436401235798, "sigma_v2": 127.0},
    {"name": "rep31", "kind": "repetition", "k": 3,
     "delta": 11.0, "beta": 0.43243761758183591, "sigma_v2": 210.0},
    {"name": "md21", "kind": "md", "k": 2, "k_prime": 1, "r": 3,
     "delta": 1.3333333333333333, "beta": 0.7054818097466764, "sigma_v2": 123.0},
    {"name": "md32", "kind": "md", "k": 3, "k_prime": 2, "r": 7,
     "delta": 1.3856406460551018, "beta": 0.66576799967659217, "sigma_v2": 110.0},
    {"name": "md32_stab", "kind": "md", "k": 3, "k_prime": 2, "r": 7,
     "delta": 0.80903983495589049, "beta": 0.59286283880227075, "sigma_v2": 120.0}
  ],
  "channel": {"p_loss": 0.1},
  "sim": {"horizon": 1000000, "seed": 1, "warmup": 1000,
          "decoder_on_empty": "zero", "coder": "huffman_stream"}
})json";

}  // namespace

const StabilizingCodeSpec& ArtifactConfig::code_by_name(const std::string& name) const {
    for (const auto& c : codes)
        if (c.name == name) return c;
    throw std::invalid_argument("config: no code named \"" + name + "\"");
}

ArtifactConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_json(root);
}

ArtifactConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ArtifactConfig default_config() { return parse_config(kDefaultJson); }

}  // namespace stabcode
