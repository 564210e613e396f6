#include "qista/layer_params.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qista/io.hpp"

namespace qista {

namespace fs = std::filesystem;
using nlohmann::json;

std::string LoadSummary::describe() const {
    std::ostringstream os;
    os << layers << " layer(s) loaded, " << clamped.size() << " eps_t entr" << (clamped.size() == 1 ? "y" : "ies")
       << " raised to " << kEpsFloor;
    return os.str();
}

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& msg) {
    throw FormatError("layer parameters: field '" + field + "': " + msg, 0, field);
}

const json& member(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    const std::string field = path.empty() ? std::string(key) : path + "." + key;
    if (it == obj.end()) schema_error(field, "missing");
    return *it;
}

double real(const json& v, const std::string& field) {
    if (!v.is_number()) schema_error(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw InvalidInput("layer parameters: field '" + field + "' is not finite");
    return d;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            schema_error(path.empty() ? key : path + "." + key, "unknown key");
    }
}

Matrix<double> read_a_t(const json& v, Eigen::Index m, Eigen::Index n, const std::string& field) {
    if (!v.is_array()) schema_error(field, "expected an array");
    Matrix<double> a(n, m);
    const bool nested = !v.empty() && v.front().is_array();
    if (nested) {
        if (Eigen::Index(v.size()) != n)
            throw InvalidInput("layer parameters: field '" + field + "' has " + std::to_string(v.size()) +
                               " rows, expected n = " + std::to_string(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = v[std::size_t(i)];
            const std::string rf = field + "[" + std::to_string(i) + "]";
            if (!row.is_array()) schema_error(rf, "expected an array");
            if (Eigen::Index(row.size()) != m)
                throw InvalidInput("layer parameters: field '" + rf + "' has " + std::to_string(row.size()) +
                                   " entries, expected m = " + std::to_string(m));
            for (Eigen::Index j = 0; j < m; ++j)
                a(i, j) = real(row[std::size_t(j)], rf + "[" + std::to_string(j) + "]");
        }
    } else {
        if (Eigen::Index(v.size()) != n * m)
            throw InvalidInput("layer parameters: field '" + field + "' has " + std::to_string(v.size()) +
                               " entries, expected n*m = " + std::to_string(n * m));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j) {
                const auto flat = std::size_t(i * m + j);
                a(i, j) = real(v[flat], field + "[" + std::to_string(flat) + "]");
            }
    }
    return a;
}

}  // namespace

LoadedModel read_layer_params(std::istream& is, Eigen::Index m, Eigen::Index n) {
    detail::require(m > 0 && n > 0, "load_layer_params: dimensions must be positive");
    const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto line = std::size_t(1 + std::count(text.begin(), text.begin() + std::ptrdiff_t(upto), '\n'));
        throw FormatError("layer parameters: syntax error at line " + std::to_string(line) + ": " + e.what(), line);
    } catch (const json::out_of_range& e) {
        // 1e999 and friends: syntactically fine, but not a finite double
        throw InvalidInput(std::string("layer parameters: non-finite number: ") + e.what());
    }
    if (!doc.is_object()) schema_error("<root>", "expected an object");
    reject_unknown(doc, {"T", "gamma", "q", "layers"}, "");

    const json& t_field = member(doc, "T", "");
    if (!t_field.is_number_integer() || t_field.get<long long>() < 1) schema_error("T", "expected an integer >= 1");
    const auto depth = t_field.get<long long>();

    LoadedModel out;
    auto& model = out.model;
    model.gamma = real(member(doc, "gamma", ""), "gamma");
    model.q = real(member(doc, "q", ""), "q");
    if (model.gamma < 0.0) throw InvalidInput("layer parameters: gamma must be >= 0");
    if (!(model.q > 0.0 && model.q <= 1.0)) throw InvalidInput("layer parameters: q must lie in (0, 1]");

    const json& layers = member(doc, "layers", "");
    if (!layers.is_array()) schema_error("layers", "expected an array");
    if (static_cast<long long>(layers.size()) != depth)
        schema_error("layers", "expected " + std::to_string(depth) + " records (T), found " +
                                   std::to_string(layers.size()));

    model.layers.reserve(std::size_t(depth));
    for (std::size_t t = 0; t < layers.size(); ++t) {
        const std::string path = "layers[" + std::to_string(t) + "]";
        const json& rec = layers[t];
        if (!rec.is_object()) schema_error(path, "expected an object");
        reject_unknown(rec, {"A_t", "lambda_t", "eps_t"}, path);

        LayerParams<double> layer;
        layer.a_t = read_a_t(member(rec, "A_t", path), m, n, path + ".A_t");
        layer.lambda_t = real(member(rec, "lambda_t", path), path + ".lambda_t");
        if (layer.lambda_t < 0.0) throw InvalidInput("layer parameters: " + path + ".lambda_t must be >= 0");

        const json& eps = member(rec, "eps_t", path);
        const std::string ef = path + ".eps_t";
        if (!eps.is_array()) schema_error(ef, "expected an array");
        if (Eigen::Index(eps.size()) != n)
            throw InvalidInput("layer parameters: field '" + ef + "' has " + std::to_string(eps.size()) +
                               " entries, expected n = " + std::to_string(n));
        layer.eps_t.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = real(eps[std::size_t(i)], ef + "[" + std::to_string(i) + "]");
            if (v < kEpsFloor) out.summary.clamped.push_back({int(t), i, v});
            layer.eps_t(i) = std::max(v, kEpsFloor);
        }
        model.layers.push_back(std::move(layer));
    }
    out.summary.layers = int(model.layers.size());
    model.validate(m, n);
    return out;
}

LoadedModel load_layer_params(const fs::path& path, Eigen::Index m, Eigen::Index n) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open parameter file '" + path.string() + "'");
    try {
        return read_layer_params(is, m, n);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.line(), e.field());
    }
}

void write_layer_params(std::ostream& os, const UnfoldedModel<double>& model) {
    json doc;
    doc["T"] = model.layers.size();
    doc["gamma"] = model.gamma;
    doc["q"] = model.q;
    json layers = json::array();
    for (const auto& l : model.layers) {
        json a = json::array();
        for (Eigen::Index i = 0; i < l.a_t.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < l.a_t.cols(); ++j) row.push_back(l.a_t(i, j));
            a.push_back(std::move(row));
        }
        json eps = json::array();
        for (Eigen::Index i = 0; i < l.eps_t.size(); ++i) eps.push_back(l.eps_t(i));
        layers.push_back({{"A_t", std::move(a)}, {"lambda_t", l.lambda_t}, {"eps_t", std::move(eps)}});
    }
    doc["layers"] = std::move(layers);
    os << doc.dump(1) << '\n';
}

void save_layer_params(const fs::path& path, const UnfoldedModel<double>& model) {
    atomic_write(path, [&](std::ostream& os) { write_layer_params(os, model); });
}

}  // namespace qista
