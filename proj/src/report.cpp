#include "levyhom/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace levyhom {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError("cannot open '" + file.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw ReportError("write failed for '" + file.string() + "'");
}

namespace {

std::string sweep_csv(const std::vector<SweepResult>& sweeps) {
  std::ostringstream os;
  os << "quantity_tag,epsilon,theta,value,std_error,n_paths,excluded\n";
  for (const auto& s : sweeps) {
    for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
      const Estimate& e = s.estimates[k];
      os << to_string(s.quantity) << ',' << format_double(s.epsilons[k]) << ','
         << format_double(s.theta) << ',' << format_double(e.value) << ','
         << format_double(e.std_error) << ',' << e.n_paths << ',' << e.excluded_paths << '\n';
    }
  }
  return os.str();
}

std::string rates_json(const std::vector<LabeledFit>& fits) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& f : fits) {
    doc.push_back({{"quantity", std::string(to_string(f.quantity))},
                   {"theta", f.theta},
                   {"slope", f.fit.slope},
                   {"intercept", f.fit.intercept},
                   {"r_squared", f.fit.r_squared},
                   {"theoretical_exponent", f.fit.theoretical_exponent},
                   {"tolerance", f.fit.tolerance},
                   {"pass", f.fit.pass},
                   {"n_points", f.fit.n_points},
                   {"n_dropped", f.fit.n_dropped}});
  }
  return doc.dump(2) + "\n";
}

const LabeledFit* find_fit(const std::vector<LabeledFit>& fits, const SweepResult& s) {
  for (const auto& f : fits)
    if (f.quantity == s.quantity && f.theta == s.theta) return &f;
  return nullptr;
}

}  // namespace

std::string render_rates_svg(const std::vector<SweepResult>& sweeps,
                             const std::vector<LabeledFit>& fits) {
  constexpr double kW = 360, kH = 260, kPad = 44;
  const std::size_t cols = 2;
  const std::size_t rows = (sweeps.size() + cols - 1) / cols;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW * cols << "\" height=\""
     << kH * std::max<std::size_t>(rows, 1) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t idx = 0; idx < sweeps.size(); ++idx) {
    const SweepResult& s = sweeps[idx];
    const double ox = static_cast<double>(idx % cols) * kW;
    const double oy = static_cast<double>(idx / cols) * kH;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < s.epsilons.size(); ++k)
      if (s.estimates[k].value > 0.0 && s.epsilons[k] > 0.0)
        pts.emplace_back(std::log10(s.epsilons[k]), std::log10(s.estimates[k].value));

    os << "<g transform=\"translate(" << ox << ',' << oy << ")\">\n";
    os << "<text x=\"" << kPad << "\" y=\"16\">" << to_string(s.quantity) << " theta="
       << s.theta << "</text>\n";
    os << "<rect x=\"" << kPad << "\" y=\"" << 24 << "\" width=\"" << kW - 2 * kPad + 20
       << "\" height=\"" << kH - kPad - 24 << "\" fill=\"none\" stroke=\"#888\"/>\n";
    if (pts.empty()) {
      os << "</g>\n";
      continue;
    }
    double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
    for (auto [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    const LabeledFit* fit = find_fit(fits, s);
    if (fit) {
      for (double x : {x0, x1}) {
        const double yl = (fit->fit.intercept + fit->fit.slope * x * std::log(10.0)) / std::log(10.0);
        y0 = std::min(y0, yl);
        y1 = std::max(y1, yl);
      }
    }
    if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
    const double left = kPad, right = kW - kPad + 20, top = 30, bottom = kH - kPad - 6;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
    auto py = [&](double y) { return bottom - (y - y0) / (y1 - y0) * (bottom - top); };

    os << "<text x=\"" << left << "\" y=\"" << kH - 14 << "\">log10 eps [" << format_double(x0).substr(0, 6)
       << ", " << format_double(x1).substr(0, 6) << "]</text>\n";
    for (auto [x, y] : pts)
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    if (fit) {
      const double ln10 = std::log(10.0);
      auto fy = [&](double x) { return (fit->fit.intercept + fit->fit.slope * x * ln10) / ln10; };
      os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fy(x0)) << "\" x2=\"" << px(x1) << "\" y2=\""
         << py(fy(x1)) << "\" stroke=\"#d62728\"/>\n";
      // theoretical slope, anchored at the largest eps
      const double ax = pts.front().first, ay = pts.front().second;
      auto gy = [&](double x) { return ay + fit->fit.theoretical_exponent * (x - ax); };
      os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(gy(x0)) << "\" x2=\"" << px(x1) << "\" y2=\""
         << py(gy(x1)) << "\" stroke=\"#2ca02c\" stroke-dasharray=\"4 3\"/>\n";
      char label[96];
      std::snprintf(label, sizeof label, "slope %.3f (theory %.3f) %s", fit->fit.slope,
                    fit->fit.theoretical_exponent, fit->fit.pass ? "pass" : "FAIL");
      os << "<text x=\"" << left + 6 << "\" y=\"" << top + 14 << "\">" << label << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::string> emit_report(const std::vector<SweepResult>& sweeps,
                                     const std::vector<LabeledFit>& fits, const fs::path& dir,
                                     bool plots) {
  if (sweeps.empty()) throw std::invalid_argument("emit_report needs at least one sweep");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create '" + dir.string() + "': " + ec.message());

  std::vector<std::string> files;
  write_text_file(dir / "sweep.csv", sweep_csv(sweeps));
  files.push_back("sweep.csv");
  write_text_file(dir / "rates.json", rates_json(fits));
  files.push_back("rates.json");
  if (plots) {
    write_text_file(dir / "rates.svg", render_rates_svg(sweeps, fits));
    files.push_back("rates.svg");
  }
  return files;
}

std::vector<SweepResult> parse_sweep_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ReportError("cannot open '" + file.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ReportError("empty file '" + file.string() + "'");
  std::vector<SweepResult> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7)
      throw ReportError(file.string() + ":" + std::to_string(lineno) + ": expected 7 columns");
    const QuantityTag tag = quantity_from_string(cells[0]);
    const double theta = std::stod(cells[2]);
    if (out.empty() || out.back().quantity != tag || out.back().theta != theta) {
      SweepResult s;
      s.quantity = tag;
      s.theta = theta;
      out.push_back(s);
    }
    Estimate e;
    e.value = std::stod(cells[3]);
    e.std_error = std::stod(cells[4]);
    e.n_paths = std::stoull(cells[5]);
    e.excluded_paths = std::stoull(cells[6]);
    out.back().epsilons.push_back(std::stod(cells[1]));
    out.back().estimates.push_back(e);
  }
  return out;
}

void write_paths_csv(const std::vector<PathRow>& rows, const fs::path& file) {
  std::ostringstream os;
  const Eigen::Index n = rows.empty() ? 0 : rows.front().q.size();
  os << "path,epsilon,t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",q" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",p" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",q_limit" << i;
  os << '\n';
  for (const auto& r : rows) {
    os << r.path << ',' << format_double(r.epsilon) << ',' << format_double(r.t);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(r.q(i));
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(r.p(i));
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(r.q_limit(i));
    os << '\n';
  }
  write_text_file(file, os.str());
}

}  // namespace levyhom
