// Copyright 2026 The wheelsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wheelsim/analytics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "wheelsim/csv.hpp"

namespace wheelsim::analytics {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error("ParseError", "line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
}

std::string modality_label(ModeId m) { return m == ModeId::EOG ? "Eye" : std::string(to_string(m)); }

void write_file(const std::filesystem::path& file, const std::string& bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoFailure", "cannot open " + file.string());
  out << bytes;
  if (!out.flush()) throw Error("IoFailure", "write failed for " + file.string());
}

json num(double v) { return v; }

}  // namespace

std::string units_for(const std::string& kind) {
  if (kind == "hr") return "bpm";
  if (kind == "spo2") return "%";
  if (kind == "temp") return "C";
  return "";
}

PairedReadings read_pairs_csv(std::istream& in, const std::string& kind) {
  PairedReadings r;
  r.kind = kind;
  r.units = units_for(kind);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "module,reference") {
        throw Error("ParseError", "expected header 'module,reference'");
      }
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error("ParseError", "line " + std::to_string(line_no) + ": expected two columns");
    }
    r.pairs.push_back({parse_double(trim(line.substr(0, comma)), line_no),
                       parse_double(trim(line.substr(comma + 1)), line_no)});
  }
  if (!header) throw Error("ParseError", "missing header 'module,reference'");
  return r;
}

PairedReadings load_pairs_csv(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw Error("IoFailure", "cannot open " + path.string());
  return read_pairs_csv(in, kind);
}

double rmse(std::span<const Pair> pairs) {
  if (pairs.empty()) throw Error("TooFewPairs", "rmse needs at least one pair");
  double sum = 0.0;
  for (const auto& p : pairs) {
    const double d = p.module - p.reference;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

AgreementReport bland_altman(const PairedReadings& readings) {
  const auto& pairs = readings.pairs;
  if (pairs.size() < 2) throw Error("TooFewPairs", "Bland-Altman analysis needs at least two pairs");
  AgreementReport r;
  r.kind = readings.kind;
  r.units = readings.units;
  r.n = pairs.size();
  r.pairs = pairs;

  double sum = 0.0;
  for (const auto& p : pairs) {
    const double d = p.module - p.reference;
    sum += d;
    r.points.push_back({(p.module + p.reference) / 2.0, d});
  }
  const double n = static_cast<double>(r.n);
  r.bias = sum / n;
  double ss = 0.0;
  for (const auto& pt : r.points) ss += (pt.diff - r.bias) * (pt.diff - r.bias);
  r.sd = std::sqrt(ss / (n - 1.0));
  r.loa_low = r.bias - kLoaMultiplier * r.sd;
  r.loa_high = r.bias + kLoaMultiplier * r.sd;
  r.rmse = rmse(pairs);
  return r;
}

const std::map<ModeId, double>& headline_accuracy() {
  static const std::map<ModeId, double> kHeadline = {
      {ModeId::Joystick, 99.0}, {ModeId::Voice, 97.0}, {ModeId::Gesture, 95.0}};
  return kHeadline;
}

AccuracyTable accuracy_table(const sim::TrialLog& log) {
  AccuracyTable t;
  std::map<ModeId, std::pair<double, int>> sums;
  for (const auto& [key, cell] : log) {
    if (cell.trials == 0) {
      throw Error("EmptyCell", modality_label(key.first) + "/" + std::string(to_string(key.second)) +
                                   " has no trials");
    }
    if (cell.successes > cell.trials) throw Error("InvalidArgument", "successes exceed trials");
    AccuracyCell c{cell.trials, cell.successes,
                   100.0 * static_cast<double>(cell.successes) / static_cast<double>(cell.trials)};
    t.cells[key] = c;
    sums[key.first].first += c.percent;
    sums[key.first].second += 1;
  }
  double overall = 0.0;
  for (const auto& [mode, s] : sums) {
    t.modality_mean[mode] = s.first / s.second;
    overall += t.modality_mean[mode];
  }
  if (!sums.empty()) t.overall_mean = overall / static_cast<double>(sums.size());

  std::ostringstream note;
  std::string sep;
  for (const auto& [mode, headline] : headline_accuracy()) {
    auto it = t.modality_mean.find(mode);
    if (it == t.modality_mean.end() || std::abs(it->second - headline) < 1e-9) continue;
    note << sep << modality_label(mode) << " mean " << format_number(it->second)
         << "% vs headline " << format_number(headline) << "%";
    sep = "; ";
  }
  if (!sep.empty()) {
    t.note = "Per-modality means disagree with the published headline accuracies: " + note.str() +
             ". The table counts are reproduced as published; the headline figures are not.";
  }
  return t;
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  if (name == "plotdata") return Format::PlotData;
  throw Error("InvalidArgument", "format must be csv, json or plotdata");
}

std::string render(const AgreementReport& r, Format format) {
  switch (format) {
    case Format::Csv:
      return "bias,sd,loa_low,loa_high,rmse,n\n" + format_number(r.bias) + "," +
             format_number(r.sd) + "," + format_number(r.loa_low) + "," +
             format_number(r.loa_high) + "," + format_number(r.rmse) + "," +
             std::to_string(r.n) + "\n";
    case Format::Json: {
      json j = {{"kind", r.kind},     {"units", r.units},       {"n", r.n},
                {"bias", num(r.bias)}, {"sd", num(r.sd)},         {"loa_low", num(r.loa_low)},
                {"loa_high", num(r.loa_high)}, {"rmse", num(r.rmse)}};
      return j.dump(2) + "\n";
    }
    case Format::PlotData: {
      json scatter = json::array(), ba = json::array();
      for (const auto& p : r.pairs) scatter.push_back({p.reference, p.module});
      for (const auto& p : r.points) ba.push_back({p.mean, p.diff});
      json j = {{"kind", r.kind},
                {"units", r.units},
                {"scatter", {{"x_label", "reference"}, {"y_label", "module"}, {"points", scatter}}},
                {"bland_altman",
                 {{"x_label", "mean"},
                  {"y_label", "module - reference"},
                  {"points", ba},
                  {"bias", r.bias},
                  {"loa_low", r.loa_low},
                  {"loa_high", r.loa_high}}}};
      return j.dump(2) + "\n";
    }
  }
  return {};
}

std::string render(const AccuracyTable& t, Format format) {
  switch (format) {
    case Format::Csv: {
      std::ostringstream out;
      out << "Command Name,Trial No.";
      for (ModeId m : sim::kTrialModalities) {
        out << "," << modality_label(m) << " Success," << modality_label(m) << " Acc (%)";
      }
      out << "\n";
      for (Direction d : sim::kTrialCommands) {
        std::string trials;
        std::ostringstream row;
        for (ModeId m : sim::kTrialModalities) {
          auto it = t.cells.find({m, d});
          if (it == t.cells.end()) {
            row << ",,";
            continue;
          }
          if (trials.empty()) trials = std::to_string(it->second.trials);
          row << "," << it->second.successes << "," << format_number(it->second.percent);
        }
        out << to_string(d) << "," << trials << row.str() << "\n";
      }
      out << "Mean,";
      for (ModeId m : sim::kTrialModalities) {
        auto it = t.modality_mean.find(m);
        out << ",," << (it == t.modality_mean.end() ? "" : format_number(it->second));
      }
      out << "\n";
      return out.str();
    }
    case Format::Json: {
      json cells = json::array();
      for (const auto& [key, c] : t.cells) {
        cells.push_back({{"modality", modality_label(key.first)},
                         {"command", std::string(to_string(key.second))},
                         {"trials", c.trials},
                         {"successes", c.successes},
                         {"percent", c.percent}});
      }
      json means = json::object();
      for (const auto& [m, v] : t.modality_mean) means[modality_label(m)] = v;
      json headline = json::object();
      for (const auto& [m, v] : headline_accuracy()) headline[modality_label(m)] = v;
      json j = {{"cells", cells},
                {"modality_mean", means},
                {"overall_mean", t.overall_mean},
                {"headline_accuracy", headline},
                {"note", t.note}};
      return j.dump(2) + "\n";
    }
    case Format::PlotData: {
      json series = json::array();
      for (ModeId m : sim::kTrialModalities) {
        json values = json::array();
        for (Direction d : sim::kTrialCommands) {
          auto it = t.cells.find({m, d});
          values.push_back(it == t.cells.end() ? json(nullptr) : json(it->second.percent));
        }
        series.push_back({{"modality", modality_label(m)}, {"percent", values}});
      }
      json categories = json::array();
      for (Direction d : sim::kTrialCommands) categories.push_back(std::string(to_string(d)));
      return json{{"categories", categories}, {"series", series}}.dump(2) + "\n";
    }
  }
  return {};
}

void emit_report(const AgreementReport& report, Format format, const std::filesystem::path& file) {
  write_file(file, render(report, format));
}

void emit_report(const AccuracyTable& table, Format format, const std::filesystem::path& file) {
  write_file(file, render(table, format));
}

}  // namespace wheelsim::analytics
