#include "spotcheck/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

namespace spotcheck::io {

namespace {

[[noreturn]] void fail_line(const std::string& what, std::size_t line) {
    throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    if (s.empty()) fail_line("missing number", line);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        fail_line("not a number: '" + s + "'", line);
    }
    if (used != s.size()) fail_line("not a number: '" + s + "'", line);
    return v;
}

std::uint64_t parse_index(const std::string& s, std::size_t line) {
    const double v = parse_number(s, line);
    if (!(v >= 0.0) || v != std::floor(v)) fail_line("index must be a nonnegative integer", line);
    return static_cast<std::uint64_t>(v);
}

int parse_flag(const std::string& s, std::size_t line) {
    const double v = parse_number(s, line);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e6) fail_line("y must be a nonnegative integer", line);
    return static_cast<int>(v);
}

void check_record(TrialRecord& r, std::size_t line) {
    try {
        r.validate();
    } catch (const Error& e) {
        fail_line(e.what(), line);
    }
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
    return in;
}

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<TrialRecord> parse_records_jsonl(std::istream& in) {
    std::vector<TrialRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            fail_line("malformed JSON", lineno);
        }
        if (!j.is_object() || !j.contains("i") || !j.contains("y")) fail_line("need fields i and y", lineno);
        if (!j["i"].is_number_unsigned() && !j["i"].is_number_integer()) fail_line("i must be an integer", lineno);
        if (!j["y"].is_number_integer() || j["y"].get<long long>() < 0) fail_line("y must be a nonnegative integer", lineno);
        TrialRecord r;
        if (j["i"].get<long long>() < 0) fail_line("i must be nonnegative", lineno);
        r.index = j["i"].get<std::uint64_t>();
        r.y = j["y"].get<int>();
        if (j.contains("x") && !j["x"].is_null()) {
            if (!j["x"].is_number()) fail_line("x must be a number", lineno);
            r.x = j["x"].get<double>();
        }
        check_record(r, lineno);
        out.push_back(r);
    }
    return out;
}

std::vector<TrialRecord> parse_records_csv(std::istream& in) {
    std::vector<TrialRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cols = split_csv(trim(line));
        if (first) {
            first = false;
            if (cols.size() >= 2 && cols[0] == "i" && cols[1] == "y") continue;
        }
        if (cols.size() == 2) cols.emplace_back();
        if (cols.size() != 3) fail_line("expected 3 columns i,y,x", lineno);
        TrialRecord r;
        r.index = parse_index(cols[0], lineno);
        r.y = parse_flag(cols[1], lineno);
        if (!cols[2].empty()) r.x = parse_number(cols[2], lineno);
        check_record(r, lineno);
        out.push_back(r);
    }
    return out;
}

std::vector<TrialRecord> read_records(const std::string& path) {
    auto in = open_or_throw(path);
    if (has_suffix(path, ".jsonl") || has_suffix(path, ".json")) return parse_records_jsonl(in);
    return parse_records_csv(in);
}

void write_records_jsonl(std::ostream& out, const std::vector<TrialRecord>& records) {
    for (const auto& r : records) {
        out << "{\"i\":" << r.index << ",\"y\":" << r.y;
        if (r.x) out << ",\"x\":" << format_double(*r.x);
        out << "}\n";
    }
}

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << "i,y,x\n";
    for (const auto& r : records) {
        out << r.index << ',' << r.y << ',';
        if (r.x) out << format_double(*r.x);
        out << '\n';
    }
}

std::vector<double> read_samples(const std::string& path) {
    if (has_suffix(path, ".jsonl") || has_suffix(path, ".json")) {
        std::vector<double> out;
        for (const auto& r : read_records(path))
            if (r.y == 0) out.push_back(*r.x);
        return out;
    }
    auto in = open_or_throw(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> out;
    bool records = false;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto cols = split_csv(t);
        if (first) {
            first = false;
            if (cols.size() >= 2 && cols[0] == "i" && cols[1] == "y") {
                records = true;
                continue;
            }
            if (cols.size() == 1 && (cols[0] == "x" || cols[0] == "value")) continue;
        }
        if (records) {
            if (cols.size() != 3) fail_line("expected 3 columns i,y,x", lineno);
            if (parse_flag(cols[1], lineno) == 0) out.push_back(parse_number(cols[2], lineno));
        } else {
            if (cols.size() != 1) fail_line("expected one value per line", lineno);
            out.push_back(parse_number(cols[0], lineno));
        }
    }
    return out;
}

ReferenceDistribution read_distribution(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::pair<double, double>> pairs;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = split_csv(t);
        if (first) {
            first = false;
            if (cols.size() == 2 && cols[0] == "value") continue;
        }
        if (cols.size() != 2) fail_line("expected value,probability", lineno);
        pairs.emplace_back(parse_number(cols[0], lineno), parse_number(cols[1], lineno));
    }
    return ReferenceDistribution::from_pairs(std::move(pairs));
}

std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail_line("expected key = value", lineno);
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) fail_line("empty key", lineno);
        out[key] = trim(t.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> read_config(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_config(in);
}

std::string read_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::InvalidInput, "write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string figure1_csv(const FigureResult& r) {
    std::ostringstream out;
    out << "i_hat,method,rep,xi_lb\n";
    for (const auto& row : r.per_rep)
        out << format_double(row.i_hat) << ',' << row.method << ',' << row.rep << ',' << format_double(row.xi_lb)
            << '\n';
    return out.str();
}

std::string summary_csv(const FigureResult& r) {
    std::ostringstream out;
    out << "i_hat,method,mean_xi_lb,stderr\n";
    for (const auto& row : r.summary)
        out << format_double(row.i_hat) << ',' << row.method << ',' << format_double(row.mean) << ','
            << format_double(row.stderr_mean) << '\n';
    return out.str();
}

std::string diffs_csv(const FigureResult& r) {
    std::ostringstream out;
    out << "i_hat,rep,diff\n";
    for (const auto& row : r.diffs)
        out << format_double(row.i_hat) << ',' << row.rep << ',' << format_double(row.diff) << '\n';
    return out.str();
}

std::string figure2_csv(const FigureResult& r) {
    std::ostringstream out;
    out << "delta_th,method,n_min,divergent\n";
    for (const auto& row : r.fig2)
        out << format_double(row.delta_th) << ',' << row.method << ',' << row.n_min << ','
            << (row.divergent ? "true" : "false") << '\n';
    return out.str();
}

}  // namespace spotcheck::io
