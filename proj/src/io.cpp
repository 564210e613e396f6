#include "qista/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qista {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    fs::path tmp = path;
    tmp += ".tmp";
    try {
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
            body(os);
            os.flush();
            if (!os) throw std::runtime_error("write to '" + tmp.string() + "' failed");
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec) throw std::runtime_error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    } catch (...) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw;
    }
}

std::string format_double(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, std::size_t(len));
}

std::optional<double> parse_double(std::string_view token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
}

namespace {

template <typename Derived>
void write_row(std::ostream& os, const Eigen::DenseBase<Derived>& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (j) os << ' ';
        os << format_double(double(row(j)));
    }
    os << '\n';
}

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    std::vector<std::string> tokens(const std::string& what) {
        std::string line;
        if (!std::getline(is_, line)) throw FormatError("unexpected end of input, expected " + what, line_ + 1, what);
        ++line_;
        std::istringstream ss(line);
        std::vector<std::string> out;
        for (std::string tok; ss >> tok;) out.push_back(tok);
        return out;
    }

    double number(const std::string& tok, const std::string& what) const {
        const auto v = parse_double(tok);
        if (!v) throw FormatError("line " + std::to_string(line_) + ": bad number '" + tok + "' in " + what, line_, what);
        if (!std::isfinite(*v)) throw FormatError("line " + std::to_string(line_) + ": non-finite value in " + what, line_, what);
        return *v;
    }

    template <typename V>
    void numbers(V&& dst, Eigen::Index count, const std::string& what) {
        const auto toks = tokens(what);
        if (Eigen::Index(toks.size()) != count)
            throw FormatError("line " + std::to_string(line_) + ": expected " + std::to_string(count) + " values in " +
                                  what + ", found " + std::to_string(toks.size()),
                              line_, what);
        for (Eigen::Index j = 0; j < count; ++j) dst(j) = number(toks[std::size_t(j)], what);
    }

    std::size_t line() const { return line_; }

private:
    std::istream& is_;
    std::size_t line_ = 0;
};

long long parse_int(const std::string& tok, std::size_t line, const std::string& what) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw FormatError("line " + std::to_string(line) + ": bad integer '" + tok + "' for " + what, line, what);
    return v;
}

}  // namespace

void write_instance(std::ostream& os, const ProblemInstance<double>& inst) {
    os << inst.m() << ' ' << inst.n() << ' ' << inst.k << ' '
       << (inst.noise_snr_db ? format_double(*inst.noise_snr_db) : std::string("none")) << ' ' << inst.seed << '\n';
    for (Eigen::Index i = 0; i < inst.m(); ++i) write_row(os, inst.a.row(i));
    write_row(os, inst.y);
    if (inst.x0)
        write_row(os, *inst.x0);
    else
        os << "none\n";
}

void save_instance(const fs::path& path, const ProblemInstance<double>& inst) {
    atomic_write(path, [&](std::ostream& os) { write_instance(os, inst); });
}

ProblemInstance<double> read_instance(std::istream& is) {
    LineReader in(is);
    const auto head = in.tokens("header");
    if (head.size() != 5) throw FormatError("line 1: header must be 'm n k noise_snr_db seed'", 1, "header");
    const auto m = parse_int(head[0], 1, "m");
    const auto n = parse_int(head[1], 1, "n");
    const auto k = parse_int(head[2], 1, "k");
    if (m <= 0 || n <= 0 || m >= n) throw FormatError("line 1: need 0 < m < n", 1, "m");
    if (k < 0 || k > n) throw FormatError("line 1: k outside [0, n]", 1, "k");

    ProblemInstance<double> inst;
    inst.k = int(k);
    if (head[3] != "none") inst.noise_snr_db = in.number(head[3], "noise_snr_db");
    {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(head[4].data(), head[4].data() + head[4].size(), seed);
        if (ec != std::errc{} || ptr != head[4].data() + head[4].size())
            throw FormatError("line 1: bad seed '" + head[4] + "'", 1, "seed");
        inst.seed = seed;
    }

    inst.a.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) in.numbers(inst.a.row(i), n, "row " + std::to_string(i + 1) + " of A");
    inst.y.resize(m);
    in.numbers(inst.y, m, "y");

    const auto x0_toks = in.tokens("x0");
    if (!(x0_toks.size() == 1 && x0_toks[0] == "none")) {
        if (Eigen::Index(x0_toks.size()) != n)
            throw FormatError("line " + std::to_string(in.line()) + ": expected " + std::to_string(n) +
                                  " values in x0 or 'none', found " + std::to_string(x0_toks.size()),
                              in.line(), "x0");
        Vector<double> x0(n);
        for (Eigen::Index j = 0; j < n; ++j) x0(j) = in.number(x0_toks[std::size_t(j)], "x0");
        inst.x0 = std::move(x0);
    }
    // Anything after x0 other than blank lines is an error.
    std::string rest;
    std::size_t line = in.line();
    while (std::getline(is, rest)) {
        ++line;
        if (rest.find_first_not_of(" \t\r") != std::string::npos)
            throw FormatError("line " + std::to_string(line) + ": trailing content after x0", line, "x0");
    }
    return inst;
}

ProblemInstance<double> load_instance(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open instance file '" + path.string() + "'");
    try {
        return read_instance(is);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.line(), e.field());
    }
}

}  // namespace qista
