#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qista/instance.hpp"
#include "qista/layer_params.hpp"

using namespace qista;
namespace fs = std::filesystem;

namespace {

std::string layer(const std::string& a, const std::string& lambda, const std::string& eps) {
    return R"({"A_t": )" + a + R"(, "lambda_t": )" + lambda + R"(, "eps_t": )" + eps + "}";
}

std::string doc(int t, const std::string& layers, const std::string& extra = "") {
    return "{\n\"T\": " + std::to_string(t) + ",\n\"gamma\": 0.1,\n\"q\": 0.05,\n" + extra + "\"layers\": [" + layers +
           "]\n}\n";
}

const std::string kA = "[[1, 0], [0, 1], [0.5, 0.5]]";  // n = 3, m = 2

LoadedModel parse(const std::string& text) {
    std::istringstream is(text);
    return read_layer_params(is, 2, 3);
}

std::string format_error_field(const std::string& text) {
    try {
        parse(text);
    } catch (const FormatError& e) {
        return e.field();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("well-formed documents") {
    SUBCASE("nested and flat A_t agree") {
        const auto nested = parse(doc(1, layer(kA, "0.01", "[1, 1, 1]")));
        const auto flat = parse(doc(1, layer("[1, 0, 0, 1, 0.5, 0.5]", "0.01", "[1, 1, 1]")));
        CHECK(nested.model.layers[0].a_t == flat.model.layers[0].a_t);
        CHECK(nested.model.layers[0].a_t(2, 1) == 0.5);
        CHECK(nested.model.gamma == 0.1);
        CHECK(nested.model.q == 0.05);
    }
    SUBCASE("sixteen layers") {
        std::string layers;
        for (int t = 0; t < 16; ++t) layers += (t ? "," : "") + layer(kA, "0.01", "[1, 1, 1]");
        const auto loaded = parse(doc(16, layers));
        CHECK(loaded.model.depth() == 16);
        CHECK(loaded.summary.layers == 16);
    }
    SUBCASE("small eps entries are raised to the floor") {
        const auto loaded = parse(doc(1, layer(kA, "0.01", "[0.01, 0.5, 0.1]")));
        CHECK(loaded.model.layers[0].eps_t(0) == kEpsFloor);
        CHECK(loaded.model.layers[0].eps_t(1) == 0.5);
        CHECK(loaded.model.layers[0].eps_t(2) == 0.1);
        REQUIRE(loaded.summary.clamped.size() == 1);
        CHECK(loaded.summary.clamped[0].layer == 0);
        CHECK(loaded.summary.clamped[0].index == 0);
        CHECK(loaded.summary.clamped[0].original == 0.01);
        CHECK(loaded.summary.describe().find("1 eps_t entry raised") != std::string::npos);
    }
    SUBCASE("negative and zero eps are clamped too") {
        const auto loaded = parse(doc(1, layer(kA, "0.01", "[-3, 0, 2]")));
        CHECK(loaded.model.layers[0].eps_t(0) == kEpsFloor);
        CHECK(loaded.model.layers[0].eps_t(1) == kEpsFloor);
        CHECK(loaded.summary.clamped.size() == 2);
    }
}

TEST_CASE("format errors") {
    SUBCASE("syntax error reports the line") {
        const std::string text = "{\n\"T\": 1,\n\"gamma\": 0.1,,\n}";
        try {
            parse(text);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("truncated file") {
        const std::string full = doc(1, layer(kA, "0.01", "[1, 1, 1]"));
        CHECK_THROWS_AS(parse(full.substr(0, full.size() / 2)), FormatError);
    }
    SUBCASE("missing fields are named") {
        CHECK(format_error_field(R"({"T": 1, "gamma": 0.1, "q": 0.05})") == "layers");
        CHECK(format_error_field(R"({"gamma": 0.1, "q": 0.05, "layers": []})") == "T");
        CHECK(format_error_field(doc(1, R"({"A_t": [[1,0],[0,1],[1,1]], "lambda_t": 0.1})")) == "layers[0].eps_t");
        CHECK(format_error_field(doc(2, layer(kA, "0.01", "[1, 1, 1]") + R"(, {"lambda_t": 0.1, "eps_t": [1,1,1]})")) ==
              "layers[1].A_t");
    }
    SUBCASE("wrong types and counts") {
        CHECK(format_error_field(doc(1, layer(kA, "\"big\"", "[1, 1, 1]"))) == "layers[0].lambda_t");
        CHECK(format_error_field(doc(2, layer(kA, "0.01", "[1, 1, 1]"))) == "layers");
        CHECK(format_error_field(R"({"T": 0, "gamma": 0.1, "q": 0.05, "layers": []})") == "T");
        CHECK(format_error_field(doc(1, layer(kA, "0.01", "[1, 1, 1]"), "\"extra\": 1,\n")) == "extra");
        CHECK(format_error_field("[1, 2]") == "<root>");
    }
}

TEST_CASE("semantic errors") {
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(parse(doc(1, layer("[[1, 0], [0, 1]]", "0.01", "[1, 1, 1]"))), InvalidInput);
        CHECK_THROWS_AS(parse(doc(1, layer("[[1, 0, 0], [0, 1, 0], [1, 1, 1]]", "0.01", "[1, 1, 1]"))), InvalidInput);
        CHECK_THROWS_AS(parse(doc(1, layer("[1, 0, 0, 1, 0.5]", "0.01", "[1, 1, 1]"))), InvalidInput);
        CHECK_THROWS_AS(parse(doc(1, layer(kA, "0.01", "[1, 1]"))), InvalidInput);
    }
    SUBCASE("out-of-range values") {
        CHECK_THROWS_AS(parse(doc(1, layer(kA, "-0.01", "[1, 1, 1]"))), InvalidInput);
        CHECK_THROWS_AS(parse(R"({"T": 1, "gamma": -1, "q": 0.05, "layers": [)" + layer(kA, "0.1", "[1,1,1]") + "]}"),
                        InvalidInput);
        CHECK_THROWS_AS(parse(R"({"T": 1, "gamma": 0, "q": 1.5, "layers": [)" + layer(kA, "0.1", "[1,1,1]") + "]}"),
                        InvalidInput);
    }
    SUBCASE("non-finite values") {
        // JSON has no literal for infinity, but overflowing numbers parse to it.
        CHECK_THROWS_AS(parse(doc(1, layer("[[1e999, 0], [0, 1], [1, 1]]", "0.01", "[1, 1, 1]"))), InvalidInput);
    }
}

TEST_CASE("file round trip") {
    const auto inst = make_instance<double>(InstanceSpec{4, 9, 2, true, std::nullopt, std::nullopt}, 3);
    auto cfg = SolverConfig<double>::defaults_for(9, lipschitz_step(inst));
    auto model = default_unfolded_model(inst, cfg, 3);
    model.layers[1].lambda_t = 1.0 / 3.0;
    model.layers[2].a_t(4, 1) = -7.123456789012345e-200;

    const auto dir = fs::temp_directory_path() / "qista_test_params";
    fs::create_directories(dir);
    const auto path = dir / "model.json";
    save_layer_params(path, model);
    const auto loaded = load_layer_params(path, 4, 9);
    REQUIRE(loaded.model.depth() == 3);
    for (int t = 0; t < 3; ++t) {
        const auto& a = model.layers[std::size_t(t)];
        const auto& b = loaded.model.layers[std::size_t(t)];
        CHECK(a.a_t == b.a_t);
        CHECK(a.lambda_t == b.lambda_t);
        CHECK(a.eps_t == b.eps_t);
    }
    CHECK(loaded.model.gamma == model.gamma);
    CHECK(loaded.model.q == model.q);

    CHECK_THROWS_AS(load_layer_params(path, 4, 10), InvalidInput);
    CHECK_THROWS(load_layer_params(dir / "missing.json", 4, 9));
}
