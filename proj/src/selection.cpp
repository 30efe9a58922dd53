#include "fewsel/selection.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "fewsel/corpus.hpp"
#include "fewsel/error.hpp"

namespace fewsel {

using nlohmann::json;

void Selection::validate() const {
    if (ids.size() != std::min(k, params.pool_size))
        throw ValidationError("selection size " + std::to_string(ids.size()) +
                              " != min(k, pool size)");
    if (scores.size() != ids.size())
        throw ValidationError("scores not aligned with ids");
    std::set<std::size_t> distinct(ids.begin(), ids.end());
    if (distinct.size() != ids.size()) throw ValidationError("selection ids not distinct");
}

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string selection_to_json(const Selection& sel) {
    sel.validate();
    std::string out = "{";
    out += "\"ids\": [";
    for (std::size_t i = 0; i < sel.ids.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(sel.ids[i]);
    }
    out += "], ";
    out += "\"k\": " + std::to_string(sel.k) + ", ";

    out += "\"params\": {";
    bool first = true;
    const auto emit = [&](const std::string& key, const std::string& val) {
        if (!first) out += ", ";
        first = false;
        out += "\"" + key + "\": " + val;
    };
    // alphabetical key order
    emit("dce_sign", sel.params.dce_sign ? "\"" + *sel.params.dce_sign + "\"" : "null");
    emit("fallback", sel.params.fallback ? "true" : "false");
    emit("filter", sel.params.filter ? "true" : "false");
    emit("g", sel.params.g ? std::to_string(*sel.params.g) : "null");
    emit("gamma", sel.params.gamma ? std::to_string(*sel.params.gamma) : "null");
    emit("ge_bias", sel.params.ge_bias ? (*sel.params.ge_bias ? "true" : "false") : "null");
    emit("kpp_first", sel.params.kpp_first ? "\"" + *sel.params.kpp_first + "\"" : "null");
    emit("lambda", sel.params.lambda ? fmt6(*sel.params.lambda) : "null");
    emit("ngram_order", sel.params.ngram_order ? std::to_string(*sel.params.ngram_order) : "null");
    emit("pool_size", std::to_string(sel.params.pool_size));
    out += "}, ";

    out += "\"scores\": [";
    for (std::size_t i = 0; i < sel.scores.size(); ++i) {
        if (i) out += ", ";
        out += fmt6(sel.scores[i]);
    }
    out += "], ";
    out += "\"seed\": " + std::to_string(sel.seed) + ", ";
    out += "\"strategy\": \"" + sel.strategy + "\"";
    out += "}\n";
    return out;
}

void write_selection(const Selection& sel, const std::string& path) {
    write_file_atomic(path, selection_to_json(sel));
}

Selection parse_selection(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed selection file: ") + e.what());
    }
    Selection sel;
    sel.strategy = j.at("strategy").get<std::string>();
    sel.k = j.at("k").get<std::size_t>();
    sel.seed = j.at("seed").get<std::uint64_t>();
    sel.ids = j.at("ids").get<std::vector<std::size_t>>();
    sel.scores = j.at("scores").get<std::vector<double>>();
    const auto& p = j.at("params");
    const auto opt = [&p](const char* key) { return p.contains(key) && !p[key].is_null(); };
    sel.params.pool_size = p.at("pool_size").get<std::size_t>();
    if (opt("lambda")) sel.params.lambda = p["lambda"].get<double>();
    if (opt("gamma")) sel.params.gamma = p["gamma"].get<int>();
    if (opt("g")) sel.params.g = p["g"].get<std::size_t>();
    if (opt("ngram_order")) sel.params.ngram_order = p["ngram_order"].get<int>();
    if (opt("dce_sign")) sel.params.dce_sign = p["dce_sign"].get<std::string>();
    if (opt("kpp_first")) sel.params.kpp_first = p["kpp_first"].get<std::string>();
    if (opt("ge_bias")) sel.params.ge_bias = p["ge_bias"].get<bool>();
    if (opt("filter")) sel.params.filter = p["filter"].get<bool>();
    if (opt("fallback")) sel.params.fallback = p["fallback"].get<bool>();
    return sel;
}

Selection load_selection(const std::string& path) { return parse_selection(read_file(path)); }

}  // namespace fewsel
