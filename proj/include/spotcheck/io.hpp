#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "spotcheck/chsh_sim.hpp"
#include "spotcheck/core.hpp"

namespace spotcheck::io {

// Shortest text with 17 significant digits; "inf", "-inf", "nan" otherwise.
std::string format_double(double v);

// JSONL objects {"i","y","x"} or CSV with header i,y,x (x empty when y != 0).
// Errors are InvalidInput and name the offending line.
std::vector<TrialRecord> parse_records_jsonl(std::istream& in);
std::vector<TrialRecord> parse_records_csv(std::istream& in);
// Format chosen by extension: .jsonl/.json is JSONL, anything else CSV.
std::vector<TrialRecord> read_records(const std::string& path);

void write_records_jsonl(std::ostream& out, const std::vector<TrialRecord>& records);
void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);

// Calibration input: a records file with y = 0 rows, or one value per line.
std::vector<double> read_samples(const std::string& path);

// CSV rows "value,probability" with an optional header.
ReferenceDistribution read_distribution(const std::string& path);

// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> read_config(const std::string& path);

std::string read_file(const std::string& path);
// Writes to a temporary sibling and renames over the target.
void atomic_write(const std::string& path, const std::string& content);

std::string figure1_csv(const FigureResult& r);
std::string summary_csv(const FigureResult& r);
std::string diffs_csv(const FigureResult& r);
std::string figure2_csv(const FigureResult& r);

}  // namespace spotcheck::io
