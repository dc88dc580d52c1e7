#include "fspec/measures.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace fspec {

using nlohmann::json;

namespace {

json encode(const MeasureSpec& spec) {
    json j;
    if (const auto* a = spec.as<Atomic>()) {
        j["variant"] = "Atomic";
        j["points"] = a->points;
        j["weights"] = a->weights;
    } else if (const auto* c = spec.as<UniformCube>()) {
        j["variant"] = "UniformCube";
        j["d"] = c->d;
    } else if (const auto* s = spec.as<SphereSurface>()) {
        j["variant"] = "SphereSurface";
        j["k"] = s->k;
    } else if (const auto* ss = spec.as<SelfSimilar1D>()) {
        j["variant"] = "SelfSimilar1D";
        j["ratio"] = ss->ratio;
        j["translations"] = ss->translations;
        j["probabilities"] = ss->probabilities;
    } else if (const auto* p = spec.as<Product>()) {
        j["variant"] = "Product";
        j["left"] = encode(*p->left);
        j["right"] = encode(*p->right);
    }
    return j;
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw InputError(where + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(where + ": field \"" + key + "\" has the wrong type (" + e.what() + ")");
    }
}

MeasureSpec decode(const json& j, const std::string& where) {
    if (!j.is_object()) throw InputError(where + ": expected a JSON object");
    const auto variant = field<std::string>(j, "variant", where);
    if (variant == "Atomic")
        return MeasureSpec::atomic(field<std::vector<Vec>>(j, "points", where),
                                   field<Vec>(j, "weights", where));
    if (variant == "UniformCube") return MeasureSpec::uniform_cube(field<int>(j, "d", where));
    if (variant == "SphereSurface") return MeasureSpec::sphere(field<int>(j, "k", where));
    if (variant == "SelfSimilar1D")
        return MeasureSpec::self_similar(field<double>(j, "ratio", where),
                                         field<Vec>(j, "translations", where),
                                         field<Vec>(j, "probabilities", where));
    if (variant == "Product") {
        if (!j.contains("left") || !j.contains("right"))
            throw InputError(where + ": Product needs \"left\" and \"right\"");
        return MeasureSpec::product(decode(j["left"], where + ".left"),
                                    decode(j["right"], where + ".right"));
    }
    throw InputError(where + ": unknown variant \"" + variant + "\"");
}

}  // namespace

std::string to_json(const MeasureSpec& spec, int indent) { return encode(spec).dump(indent); }

MeasureSpec measure_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("measure file: ") + e.what());
    }
    return decode(j, "measure");
}

MeasureSpec load_measure(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open measure file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return measure_from_json(ss.str());
}

}  // namespace fspec
