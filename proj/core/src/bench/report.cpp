#include "smoothrl/bench/report.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"
#include "smoothrl/metrics/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace smoothrl::bench {

namespace {

std::vector<std::string> ordered(const std::vector<std::string>& canonical, std::vector<std::string> seen) {
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  std::vector<std::string> out;
  for (const auto& c : canonical) {
    if (std::binary_search(seen.begin(), seen.end(), c)) out.push_back(c);
  }
  for (const auto& s : seen) {
    if (std::find(canonical.begin(), canonical.end(), s) == canonical.end()) out.push_back(s);
  }
  return out;
}

std::string printf_str(const char* fmt, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

std::string format_return(const Cell& c) {
  const double mag = std::abs(c.return_mean);
  const char* fmt = mag >= 100.0 ? "%.0f ± %.0f" : mag >= 10.0 ? "%.1f ± %.1f" : "%.2f ± %.2f";
  return printf_str(fmt, c.return_mean, c.return_std);
}

std::string format_sm(const Cell& c) { return printf_str("%.3g ± %.2g", c.sm_mean, c.sm_std); }

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  return s + std::string(width > display_width(s) ? width - display_width(s) : 0, ' ');
}

std::string block(const ReportTable& t, const std::string& title, bool sm) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"method"});
  for (const auto& e : t.envs) rows[0].push_back(e);
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    std::vector<std::string> row{t.methods[m]};
    for (std::size_t e = 0; e < t.envs.size(); ++e) {
      const auto& c = t.at(m, e);
      if (!c) {
        row.push_back("—");
      } else {
        row.push_back((sm ? format_sm(*c) : format_return(*c)) + ((sm ? c->best_sm : c->best_return) ? " *" : ""));
      }
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], display_width(r[i]));
  }
  std::string out = title + "\n";
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? " | " : "") + pad(r[i], width[i]);
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out += s + "\n";
  };
  line(rows[0]);
  std::string rule;
  for (std::size_t i = 0; i < width.size(); ++i) rule += (i ? "-+-" : "") + std::string(width[i], '-');
  out += rule + "\n";
  for (std::size_t r = 1; r < rows.size(); ++r) line(rows[r]);
  return out;
}

// Round step for axis ticks: 1, 2 or 5 times a power of ten.
double nice_step(double span, int ticks) {
  const double raw = span / ticks;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= raw) return m * p;
  }
  return 10.0 * p;
}

std::string fmt_tick(double v) {
  char buf[32];
  if (std::abs(v) >= 1e4 || (std::abs(v) < 1e-2 && v != 0.0)) {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%g", v);
  }
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

ReportTable build_table(const std::vector<RunRecord>& records, std::vector<std::string> methods,
                        std::vector<std::string> envs) {
  std::vector<std::string> seen_methods, seen_envs;
  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    seen_methods.push_back(r.method);
    seen_envs.push_back(r.env);
    groups[{r.method, r.env}].push_back(&r);
  }
  ReportTable t;
  t.methods = methods.empty() ? ordered(regularizers::method_names(), seen_methods) : std::move(methods);
  t.envs = envs.empty() ? ordered(envs::environment_names(), seen_envs) : std::move(envs);
  t.cells.assign(t.methods.size(), std::vector<std::optional<Cell>>(t.envs.size()));
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    for (std::size_t e = 0; e < t.envs.size(); ++e) {
      const auto it = groups.find({t.methods[m], t.envs[e]});
      if (it == groups.end()) continue;
      auto rs = it->second;
      std::sort(rs.begin(), rs.end(), [](const RunRecord* a, const RunRecord* b) { return a->seed < b->seed; });
      std::vector<double> ret, sm;
      for (const auto* r : rs) {
        ret.push_back(r->return_mean);
        sm.push_back(r->sm_mean);
      }
      Cell c;
      c.seeds = static_cast<int>(rs.size());
      std::tie(c.return_mean, c.return_std) = metrics::mean_std(ret);
      std::tie(c.sm_mean, c.sm_std) = metrics::mean_std(sm);
      t.cells[m][e] = c;
    }
  }
  for (std::size_t e = 0; e < t.envs.size(); ++e) {
    std::optional<std::size_t> best_r, best_s;
    for (std::size_t m = 0; m < t.methods.size(); ++m) {
      const auto& c = t.cells[m][e];
      if (!c) continue;
      if (!best_r) {
        best_r = best_s = m;
        continue;
      }
      const Cell& br = *t.cells[*best_r][e];
      if (c->return_mean > br.return_mean || (c->return_mean == br.return_mean && c->return_std < br.return_std)) {
        best_r = m;
      }
      const Cell& bs = *t.cells[*best_s][e];
      if (c->sm_mean < bs.sm_mean || (c->sm_mean == bs.sm_mean && c->sm_std < bs.sm_std)) best_s = m;
    }
    if (best_r) t.cells[*best_r][e]->best_return = true;
    if (best_s) t.cells[*best_s][e]->best_sm = true;
  }
  return t;
}

std::string format_text(const ReportTable& table) {
  return block(table, "Cumulative return (higher is better)", false) + "\n" +
         block(table, "Smoothness Sm (lower is better)", true) + "\n* best in column\n";
}

std::string format_csv(const ReportTable& table) {
  std::string out = "format_version,method,env,seeds,return_mean,return_std,sm_mean,sm_std,best_return,best_sm\n";
  const std::string v = std::to_string(kFormatVersion);
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    for (std::size_t e = 0; e < table.envs.size(); ++e) {
      out += v + "," + table.methods[m] + "," + table.envs[e] + ",";
      const auto& c = table.at(m, e);
      if (!c) {
        out += "0,—,—,—,—,0,0\n";
        continue;
      }
      out += std::to_string(c->seeds) + "," + format_number(c->return_mean) + "," + format_number(c->return_std) +
             "," + format_number(c->sm_mean) + "," + format_number(c->sm_std) + "," + (c->best_return ? "1" : "0") +
             "," + (c->best_sm ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string render_curves_svg(const std::string& title, const std::vector<SeedCurve>& curves) {
  const double w = 640, h = 400, left = 70, right = 20, top = 40, bottom = 50;
  double xmax = 0, ymin = INFINITY, ymax = -INFINITY;
  std::size_t longest = 0;
  for (const auto& c : curves) {
    longest = std::max(longest, c.rows.size());
    for (const auto& r : c.rows) {
      xmax = std::max(xmax, static_cast<double>(r.step));
      if (std::isfinite(r.mean_episode_return)) {
        ymin = std::min(ymin, r.mean_episode_return);
        ymax = std::max(ymax, r.mean_episode_return);
      }
    }
  }
  if (!std::isfinite(ymin)) ymin = -1, ymax = 0;
  if (ymax - ymin < 1e-9) ymin -= 1, ymax += 1;
  const double ystep = nice_step(ymax - ymin, 5);
  ymin = std::floor(ymin / ystep) * ystep;
  ymax = std::ceil(ymax / ystep) * ystep;
  if (xmax <= 0) xmax = 1;
  const double xstep = nice_step(xmax, 5);
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double x) { return left + x / xmax * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  auto pt = [&](double x, double y) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", px(x), py(y));
    return std::string(buf);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
    << "</text>\n";
  for (double y = ymin; y <= ymax + 1e-9 * ystep; y += ystep) {
    o << "<line x1=\"" << num(left) << "\" x2=\"" << num(w - right) << "\" y1=\"" << num(py(y)) << "\" y2=\""
      << num(py(y)) << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << fmt_tick(y)
      << "</text>\n";
  }
  for (double x = 0; x <= xmax + 1e-9 * xstep; x += xstep) {
    o << "<text x=\"" << num(px(x)) << "\" y=\"" << num(h - bottom + 18) << "\" text-anchor=\"middle\">"
      << fmt_tick(x) << "</text>\n";
  }
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"" << num(h - 10) << "\" text-anchor=\"middle\">environment steps</text>\n";
  o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << "mean episode return</text>\n";

  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const char* style) {
    if (pts.empty()) return;
    o << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) o << (i ? " " : "") << pt(pts[i].first, pts[i].second);
    o << "\"/>\n";
  };
  for (const auto& c : curves) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : c.rows) {
      if (std::isfinite(r.mean_episode_return)) pts.emplace_back(static_cast<double>(r.step), r.mean_episode_return);
    }
    o << "<!-- seed " << c.seed << " -->\n";
    polyline(pts, "stroke=\"#9ecae1\" stroke-width=\"1\"");
  }
  std::vector<std::pair<double, double>> mean;
  for (std::size_t i = 0; i < longest; ++i) {
    double sum = 0.0, step = 0.0;
    int n = 0;
    for (const auto& c : curves) {
      if (i < c.rows.size() && std::isfinite(c.rows[i].mean_episode_return)) {
        sum += c.rows[i].mean_episode_return;
        step = static_cast<double>(c.rows[i].step);
        ++n;
      }
    }
    if (n > 0) mean.emplace_back(step, sum / n);
  }
  polyline(mean, "stroke=\"#08519c\" stroke-width=\"2.5\"");
  o << "<text x=\"" << num(w - right - 4) << "\" y=\"" << num(top + 16) << "\" text-anchor=\"end\" fill=\"#08519c\">"
    << "mean of " << curves.size() << " seed(s)</text>\n";
  o << "</svg>\n";
  return o.str();
}

ReportFiles render_report(const std::filesystem::path& out_dir, const std::vector<std::string>& methods,
                          const std::vector<std::string>& envs) {
  const auto records = load_records(out_dir);
  if (records.empty()) throw IoError("no run records under " + (out_dir / "runs").string());
  const ReportTable table = build_table(records, methods, envs);
  ReportFiles files;
  files.text = format_text(table);
  const auto dir = out_dir / "report";
  files.table_txt = dir / "table.txt";
  files.table_csv = dir / "table.csv";
  write_file_atomic(files.table_txt, files.text);
  write_file_atomic(files.table_csv, format_csv(table));

  std::map<std::pair<std::string, std::string>, std::vector<SeedCurve>> curves;
  for (const auto& r : records) {
    if (!r.ok() || r.curve_path.empty()) continue;
    curves[{r.env, r.method}].push_back({r.seed, ppo::read_training_curve(out_dir / r.curve_path)});
  }
  for (auto& [key, list] : curves) {
    std::sort(list.begin(), list.end(), [](const SeedCurve& a, const SeedCurve& b) { return a.seed < b.seed; });
    const auto path = dir / "curves" / (key.first + "__" + key.second + ".svg");
    write_file_atomic(path, render_curves_svg(key.second + " on " + key.first, list));
    files.plots.push_back(path);
  }
  return files;
}

}  // namespace smoothrl::bench
