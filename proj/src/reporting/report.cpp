#include "src/reporting/report.h"

#include "src/core/errors.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace reporting {

using ensemble_engine::ExperimentResults;
using ensemble_engine::SessionRecord;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw core::IoError("cannot write '" + p.string() + "'");
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace

double histogram_mode(const std::vector<double>& values) {
    const Histogram h = histogram(values, freedman_diaconis_width(values));
    size_t best = 0;
    for (size_t i = 1; i < h.frequency.size(); ++i) {
        if (h.frequency[i] > h.frequency[best]) best = i;
    }
    return 0.5 * (h.edges[best] + h.edges[best + 1]);
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

namespace {

const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f", "#956cb4", "#8c613c"};

class SvgCanvas {
  public:
    SvgCanvas(double width, double height) : w_(width), h_(height) {}

    void rect(double x, double y, double w, double h, const std::string& fill, double opacity = 1.0) {
        body_ += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" + fmt2(w) + "\" height=\"" + fmt2(h) +
                 "\" fill=\"" + fill + "\" fill-opacity=\"" + fmt2(opacity) + "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333", double width = 1.0) {
        body_ += "<line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) + "\" y2=\"" + fmt2(y2) +
                 "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt2(width) + "\"/>\n";
    }
    void text(double x, double y, const std::string& s, double size = 11.0, const char* anchor = "start") {
        body_ += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" font-size=\"" + fmt2(size) +
                 "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
    }
    void write(const std::filesystem::path& path) const {
        std::ofstream out = open_out(path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(w_) << "\" height=\"" << fmt2(h_)
            << "\" viewBox=\"0 0 " << fmt2(w_) << " " << fmt2(h_) << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_ << "</svg>\n";
    }

  private:
    double w_, h_;
    std::string body_;
};

std::string series_label(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g%%", 100.0 * p);
    return buf;
}

// Grouped-bar histogram over common bins, one colored series per share level.
void render_grouped_histogram(const std::vector<std::vector<double>>& series, const std::vector<std::string>& labels,
                              const std::string& title, const std::string& x_label,
                              const std::filesystem::path& path) {
    std::vector<double> pooled;
    for (const auto& s : series) pooled.insert(pooled.end(), s.begin(), s.end());
    if (pooled.empty()) throw core::ValidationError("render: no samples to plot");
    const Histogram pooled_hist = histogram(pooled, freedman_diaconis_width(pooled));
    std::vector<Histogram> hists;
    double fmax = 0.0;
    for (const auto& s : series) {
        hists.push_back(histogram_with_edges(s, pooled_hist.edges));
        for (double f : hists.back().frequency) fmax = std::max(fmax, f);
    }
    if (fmax <= 0.0) fmax = 1.0;

    const double W = 860, H = 420, ml = 60, mr = 20, mt = 40, mb = 50;
    SvgCanvas svg(W, H);
    svg.text(W / 2, 22, title, 14, "middle");
    const double plot_w = W - ml - mr, plot_h = H - mt - mb;
    const size_t bins = pooled_hist.frequency.size();
    const double bin_px = plot_w / static_cast<double>(bins);
    const double bar_px = bin_px / static_cast<double>(series.size() + 1);
    for (size_t b = 0; b < bins; ++b) {
        for (size_t k = 0; k < hists.size(); ++k) {
            const double f = hists[k].frequency[b];
            if (f <= 0.0) continue;
            const double bh = f / fmax * plot_h;
            svg.rect(ml + bin_px * static_cast<double>(b) + bar_px * (0.5 + static_cast<double>(k)), mt + plot_h - bh,
                     bar_px, bh, kPalette[k % 6], 0.9);
        }
    }
    svg.line(ml, mt + plot_h, ml + plot_w, mt + plot_h);
    svg.line(ml, mt, ml, mt + plot_h);
    const size_t tick_step = std::max<size_t>(1, bins / 8);
    for (size_t b = 0; b <= bins; b += tick_step) {
        const double x = ml + bin_px * static_cast<double>(b);
        svg.line(x, mt + plot_h, x, mt + plot_h + 4);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", pooled_hist.edges[b]);
        svg.text(x, mt + plot_h + 18, buf, 10, "middle");
    }
    svg.text(ml + plot_w / 2, H - 14, x_label, 11, "middle");
    char ybuf[32];
    std::snprintf(ybuf, sizeof(ybuf), "%.3g", fmax);
    svg.text(ml - 6, mt + 10, ybuf, 10, "end");
    svg.text(ml - 6, mt + plot_h, "0", 10, "end");
    for (size_t k = 0; k < labels.size(); ++k) {
        const double lx = ml + 10 + 90.0 * static_cast<double>(k);
        svg.rect(lx, 30, 10, 10, kPalette[k % 6], 0.9);
        svg.text(lx + 14, 39, labels[k], 10);
    }
    svg.write(path);
}

void draw_box(SvgCanvas& svg, double cx, double box_w, const BoxplotStats& st, double y_of_low, double scale,
              double base_y, const std::string& color) {
    auto y = [&](double v) { return base_y - (v - y_of_low) * scale; };
    svg.line(cx, y(st.whisker_low), cx, y(st.q1));
    svg.line(cx, y(st.q3), cx, y(st.whisker_high));
    svg.line(cx - box_w / 4, y(st.whisker_low), cx + box_w / 4, y(st.whisker_low));
    svg.line(cx - box_w / 4, y(st.whisker_high), cx + box_w / 4, y(st.whisker_high));
    svg.rect(cx - box_w / 2, y(st.q3), box_w, std::max(0.5, y(st.q1) - y(st.q3)), color, 0.5);
    svg.line(cx - box_w / 2, y(st.median), cx + box_w / 2, y(st.median), "#c22", 1.5);
    for (double o : st.outliers) {
        svg.rect(cx - 1.5, y(o) - 1.5, 3, 3, "#555", 0.8);
    }
}

void render_box_panel(const std::vector<std::vector<double>>& series, const std::vector<std::string>& labels,
                      const std::string& title, const std::string& y_label, const std::filesystem::path& path) {
    if (series.empty()) throw core::ValidationError("render: no series to plot");
    double lo = 1e300, hi = -1e300;
    std::vector<BoxplotStats> stats;
    for (const auto& s : series) {
        stats.push_back(summarize(s));
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    const double W = 640, H = 420, ml = 70, mt = 40, mb = 40, mr = 20;
    SvgCanvas svg(W, H);
    svg.text(W / 2, 22, title, 14, "middle");
    const double plot_h = H - mt - mb, plot_w = W - ml - mr;
    const double scale = plot_h / (hi - lo);
    const double step = plot_w / static_cast<double>(series.size());
    for (size_t k = 0; k < series.size(); ++k) {
        const double cx = ml + step * (0.5 + static_cast<double>(k));
        draw_box(svg, cx, std::min(46.0, step * 0.5), stats[k], lo, scale, mt + plot_h, kPalette[k % 6]);
        svg.text(cx, H - 18, labels[k], 11, "middle");
    }
    svg.line(ml, mt, ml, mt + plot_h);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", hi);
    svg.text(ml - 6, mt + 10, buf, 10, "end");
    std::snprintf(buf, sizeof(buf), "%.4g", lo);
    svg.text(ml - 6, mt + plot_h, buf, 10, "end");
    svg.text(16, mt + plot_h / 2, y_label, 11, "middle");
    svg.write(path);
}

void render_hourly_price_boxes(const ExperimentResults& r, const std::filesystem::path& path) {
    // One panel row per share level, one box per hour.
    std::vector<std::vector<std::vector<double>>> prices(r.p_percent.size(),
                                                         std::vector<std::vector<double>>(24));
    for (const SessionRecord& rec : r.sessions) {
        if (rec.cleared_mwh > 0.0)
            prices[static_cast<size_t>(rec.p_index)][static_cast<size_t>(rec.hour)].push_back(rec.cost_eur /
                                                                                              rec.cleared_mwh);
    }
    const double W = 900, row_h = 180, ml = 60, mt = 30;
    const double H = mt + row_h * static_cast<double>(r.p_percent.size()) + 30;
    SvgCanvas svg(W, H);
    svg.text(W / 2, 18, "Hourly session prices (EUR/MWh)", 14, "middle");
    for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
        double lo = 1e300, hi = -1e300;
        for (const auto& hour : prices[pi]) {
            for (double v : hour) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        const double base = mt + row_h * static_cast<double>(pi + 1) - 30;
        svg.text(W - 80, base - row_h + 50, series_label(r.p_percent[pi]), 11);
        if (hi <= lo) continue;
        const double scale = (row_h - 60) / (hi - lo);
        const double step = (W - ml - 100) / 24.0;
        for (int h = 0; h < 24; ++h) {
            const auto& sample = prices[pi][static_cast<size_t>(h)];
            if (sample.empty()) continue;
            draw_box(svg, ml + step * (0.5 + h), std::min(18.0, step * 0.6), summarize(sample), lo, scale, base,
                     kPalette[pi % 6]);
            if (pi + 1 == r.p_percent.size() && h % 3 == 0)
                svg.text(ml + step * (0.5 + h), H - 8, std::to_string(h), 10, "middle");
        }
    }
    svg.write(path);
}

void render_tech_profit_bars(const ExperimentResults& r, const std::filesystem::path& path) {
    const double W = 640, H = 380, ml = 70, mt = 40, mb = 60, mr = 20;
    SvgCanvas svg(W, H);
    svg.text(W / 2, 22, "Mean generator profit per session by technology", 13, "middle");
    double vmax = 0.0;
    for (const auto& arr : r.tech_profit_eur) {
        for (double v : arr) vmax = std::max(vmax, v);
    }
    if (vmax <= 0.0) vmax = 1.0;
    const double plot_h = H - mt - mb, plot_w = W - ml - mr;
    const double group_w = plot_w / grid_model::kTechnologyCount;
    const double bar_w = group_w / static_cast<double>(r.p_percent.size() + 1);
    for (int tech = 0; tech < grid_model::kTechnologyCount; ++tech) {
        for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
            const double v = r.tech_profit_eur[pi][static_cast<size_t>(tech)];
            const double bh = std::max(0.0, v) / vmax * plot_h;
            svg.rect(ml + group_w * tech + bar_w * (0.5 + static_cast<double>(pi)), mt + plot_h - bh, bar_w, bh,
                     kPalette[pi % 6], 0.9);
        }
        svg.text(ml + group_w * (tech + 0.5), H - 34,
                 grid_model::to_string(static_cast<grid_model::Technology>(tech)), 11, "middle");
    }
    svg.line(ml, mt + plot_h, ml + plot_w, mt + plot_h);
    svg.line(ml, mt, ml, mt + plot_h);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g EUR", vmax);
    svg.text(ml - 6, mt + 10, buf, 10, "end");
    for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
        const double lx = ml + 10 + 90.0 * static_cast<double>(pi);
        svg.rect(lx, H - 22, 10, 10, kPalette[pi % 6], 0.9);
        svg.text(lx + 14, H - 13, series_label(r.p_percent[pi]), 10);
    }
    svg.write(path);
}

} // namespace

// ---------------------------------------------------------------------------
// CSV bundle
// ---------------------------------------------------------------------------

namespace {

void write_volumes_csv(const ExperimentResults& r, const std::filesystem::path& dir) {
    std::ofstream out = open_out(dir / "volumes.csv");
    out << "p_percent,member,up_gwh,down_gwh\n";
    for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
        for (long j = 0; j < r.members; ++j) {
            out << fmt(r.p_percent[pi]) << ',' << j << ',' << fmt(r.daily_up_volume_gwh[pi][static_cast<size_t>(j)])
                << ',' << fmt(r.daily_down_volume_gwh[pi][static_cast<size_t>(j)]) << '\n';
        }
    }
}

void write_costs_csv(const ExperimentResults& r, const std::filesystem::path& dir) {
    std::ofstream out = open_out(dir / "daily_costs.csv");
    out << "p_percent,member,up_cost_eur,down_cost_eur\n";
    for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
        for (long j = 0; j < r.members; ++j) {
            out << fmt(r.p_percent[pi]) << ',' << j << ',' << fmt(r.daily_up_cost_eur[pi][static_cast<size_t>(j)])
                << ',' << fmt(r.daily_down_cost_eur[pi][static_cast<size_t>(j)]) << '\n';
        }
    }
}

void write_sessions_csv(const ExperimentResults& r, const std::filesystem::path& dir) {
    std::ofstream out = open_out(dir / "sessions.csv");
    out << "p_percent,zone,t,hour,member,direction,requirement_mwh,cleared_mwh,cost_eur,marginal_price_eur_mwh,"
           "shortfall_mwh\n";
    for (const SessionRecord& rec : r.sessions) {
        out << fmt(r.p_percent[static_cast<size_t>(rec.p_index)]) << ','
            << r.zone_ids[static_cast<size_t>(rec.zone_index)] << ',' << rec.t << ',' << rec.hour << ',' << rec.member
            << ',' << balancing_market::to_string(rec.direction) << ',' << fmt(rec.requirement_mwh) << ','
            << fmt(rec.cleared_mwh) << ',' << fmt(rec.cost_eur) << ',' << fmt(rec.marginal_price_eur_mwh) << ','
            << fmt(rec.shortfall_mwh) << '\n';
    }
}

void write_prices_csv(const ExperimentResults& r, const std::filesystem::path& dir) {
    std::ofstream out = open_out(dir / "prices_hourly.csv");
    out << "p_percent,hour,zone,member,direction,price_eur_mwh,cleared_mwh\n";
    for (const SessionRecord& rec : r.sessions) {
        if (rec.cleared_mwh <= 0.0) continue;
        out << fmt(r.p_percent[static_cast<size_t>(rec.p_index)]) << ',' << rec.hour << ','
            << r.zone_ids[static_cast<size_t>(rec.zone_index)] << ',' << rec.member << ','
            << balancing_market::to_string(rec.direction) << ',' << fmt(rec.cost_eur / rec.cleared_mwh) << ','
            << fmt(rec.cleared_mwh) << '\n';
    }
}

void write_tech_profits_csv(const ExperimentResults& r, const std::filesystem::path& dir) {
    std::ofstream out = open_out(dir / "tech_profits.csv");
    out << "p_percent,technology,mean_profit_eur\n";
    for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
        for (int tech = 0; tech < grid_model::kTechnologyCount; ++tech) {
            out << fmt(r.p_percent[pi]) << ',' << grid_model::to_string(static_cast<grid_model::Technology>(tech))
                << ',' << fmt(r.tech_profit_eur[pi][static_cast<size_t>(tech)]) << '\n';
        }
    }
}

void write_summary_csv(const ExperimentResults& r, const std::filesystem::path& dir) {
    std::ofstream out = open_out(dir / "summary.csv");
    out << "p_percent,metric,n,mean,median,q1,q3,whisker_low,whisker_high,outlier_count,skewness\n";
    auto emit = [&](double p, const char* metric, const std::vector<double>& v) {
        const BoxplotStats st = summarize(v);
        double skew = std::numeric_limits<double>::quiet_NaN();
        try {
            skew = skewness(v);
        } catch (const std::invalid_argument&) {
        }
        out << fmt(p) << ',' << metric << ',' << v.size() << ',' << fmt(mean(v)) << ',' << fmt(st.median) << ','
            << fmt(st.q1) << ',' << fmt(st.q3) << ',' << fmt(st.whisker_low) << ',' << fmt(st.whisker_high) << ','
            << st.outliers.size() << ',' << fmt(skew) << '\n';
    };
    for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
        emit(r.p_percent[pi], "daily_up_volume_gwh", r.daily_up_volume_gwh[pi]);
        emit(r.p_percent[pi], "daily_down_volume_gwh", r.daily_down_volume_gwh[pi]);
        emit(r.p_percent[pi], "daily_up_cost_eur", r.daily_up_cost_eur[pi]);
        emit(r.p_percent[pi], "daily_down_cost_eur", r.daily_down_cost_eur[pi]);
    }
}

void write_metadata(const ExperimentResults& r, const std::filesystem::path& dir) {
    json doc;
    doc["master_seed"] = r.master_seed;
    doc["config_hash"] = r.config_hash;
    doc["p_percent"] = r.p_percent;
    doc["zone_ids"] = r.zone_ids;
    doc["t_count"] = r.t_count;
    doc["time_stride"] = r.time_stride;
    doc["interval_hours"] = r.interval_hours;
    doc["members"] = r.members;
    doc["wind_model"] = fluctuations::to_string(r.wind_model);
    std::ofstream out = open_out(dir / "metadata.json");
    out << doc.dump(2) << '\n';
}

} // namespace

void render_summary(const ExperimentResults& r, const std::filesystem::path& out_dir) {
    if (r.p_percent.empty()) throw core::ValidationError("render_report: results hold no share levels");
    if (r.daily_up_volume_gwh.size() != r.p_percent.size() || r.members <= 0)
        throw core::ValidationError("render_report: inconsistent results");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw core::IoError("cannot create output directory '" + out_dir.string() + "'");

    write_summary_csv(r, out_dir);

    std::vector<std::string> labels;
    for (double p : r.p_percent) labels.push_back(series_label(p));
    auto spread = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi > *lo;
    };
    bool any_volume_spread = false, any_cost_spread = false;
    for (const auto& v : r.daily_up_volume_gwh) any_volume_spread = any_volume_spread || spread(v);
    for (const auto& v : r.daily_up_cost_eur) any_cost_spread = any_cost_spread || spread(v);
    if (any_volume_spread) {
        render_grouped_histogram(r.daily_up_volume_gwh, labels, "Daily up-market volumes", "GWh",
                                 out_dir / "volumes_hist.svg");
        render_box_panel(r.daily_up_volume_gwh, labels, "Daily up-market volumes", "GWh",
                         out_dir / "volumes_box.svg");
    }
    if (any_cost_spread) {
        render_grouped_histogram(r.daily_up_cost_eur, labels, "Daily up-market costs", "EUR",
                                 out_dir / "costs_hist.svg");
        render_box_panel(r.daily_up_cost_eur, labels, "Daily up-market costs", "EUR", out_dir / "costs_box.svg");
    }
    render_hourly_price_boxes(r, out_dir / "prices_hourly_box.svg");
    render_tech_profit_bars(r, out_dir / "tech_profits.svg");
}

void render_report(const ExperimentResults& r, const std::filesystem::path& out_dir) {
    if (r.p_percent.empty()) throw core::ValidationError("render_report: results hold no share levels");
    if (r.daily_up_volume_gwh.size() != r.p_percent.size() || r.members <= 0)
        throw core::ValidationError("render_report: inconsistent results");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw core::IoError("cannot create output directory '" + out_dir.string() + "'");

    write_volumes_csv(r, out_dir);
    write_costs_csv(r, out_dir);
    write_sessions_csv(r, out_dir);
    write_prices_csv(r, out_dir);
    write_tech_profits_csv(r, out_dir);
    write_metadata(r, out_dir);
    render_summary(r, out_dir);
}

// ---------------------------------------------------------------------------
// Bundle re-parsing
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, size_t expected_fields) {
    std::ifstream in(path);
    if (!in) throw core::IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != expected_fields)
            throw core::ParseError("'" + path.string() + "': expected " + std::to_string(expected_fields) +
                                   " fields, got " + std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    return rows;
}

} // namespace

ensemble_engine::ExperimentResults load_results(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "metadata.json");
    if (!meta_in) throw core::IoError("cannot open '" + (dir / "metadata.json").string() + "'");
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
        throw core::ParseError(std::string("metadata.json is not valid JSON: ") + e.what());
    }

    ExperimentResults r;
    r.master_seed = meta.at("master_seed").get<std::uint64_t>();
    r.config_hash = meta.at("config_hash").get<std::string>();
    r.p_percent = meta.at("p_percent").get<std::vector<double>>();
    r.zone_ids = meta.at("zone_ids").get<std::vector<std::string>>();
    r.t_count = meta.at("t_count").get<int>();
    r.time_stride = meta.at("time_stride").get<int>();
    r.interval_hours = meta.at("interval_hours").get<double>();
    r.members = meta.at("members").get<long>();
    r.wind_model = fluctuations::wind_model_from_string(meta.at("wind_model").get<std::string>());

    std::map<double, size_t> p_index;
    for (size_t i = 0; i < r.p_percent.size(); ++i) p_index[r.p_percent[i]] = i;
    std::map<std::string, int> zone_pos;
    for (size_t i = 0; i < r.zone_ids.size(); ++i) zone_pos[r.zone_ids[i]] = static_cast<int>(i);

    const size_t np = r.p_percent.size();
    const size_t nm = static_cast<size_t>(r.members);
    r.daily_up_volume_gwh.assign(np, std::vector<double>(nm, 0.0));
    r.daily_down_volume_gwh.assign(np, std::vector<double>(nm, 0.0));
    r.daily_up_cost_eur.assign(np, std::vector<double>(nm, 0.0));
    r.daily_down_cost_eur.assign(np, std::vector<double>(nm, 0.0));
    r.tech_profit_eur.assign(np, {0.0, 0.0, 0.0, 0.0});

    for (const auto& row : read_csv(dir / "volumes.csv", 4)) {
        const size_t pi = p_index.at(std::stod(row[0]));
        const size_t j = static_cast<size_t>(std::stol(row[1]));
        r.daily_up_volume_gwh[pi][j] = std::stod(row[2]);
        r.daily_down_volume_gwh[pi][j] = std::stod(row[3]);
    }
    for (const auto& row : read_csv(dir / "daily_costs.csv", 4)) {
        const size_t pi = p_index.at(std::stod(row[0]));
        const size_t j = static_cast<size_t>(std::stol(row[1]));
        r.daily_up_cost_eur[pi][j] = std::stod(row[2]);
        r.daily_down_cost_eur[pi][j] = std::stod(row[3]);
    }
    for (const auto& row : read_csv(dir / "tech_profits.csv", 3)) {
        const size_t pi = p_index.at(std::stod(row[0]));
        r.tech_profit_eur[pi][static_cast<size_t>(grid_model::technology_from_string(row[1]))] = std::stod(row[2]);
    }
    for (const auto& row : read_csv(dir / "sessions.csv", 11)) {
        SessionRecord rec;
        rec.p_index = static_cast<int>(p_index.at(std::stod(row[0])));
        rec.zone_index = zone_pos.at(row[1]);
        rec.t = std::stoi(row[2]);
        rec.hour = std::stoi(row[3]);
        rec.member = std::stol(row[4]);
        rec.direction =
            row[5] == "up" ? balancing_market::Direction::up : balancing_market::Direction::down;
        rec.requirement_mwh = std::stod(row[6]);
        rec.cleared_mwh = std::stod(row[7]);
        rec.cost_eur = std::stod(row[8]);
        rec.marginal_price_eur_mwh = std::stod(row[9]);
        rec.shortfall_mwh = std::stod(row[10]);
        r.sessions.push_back(rec);
    }
    return r;
}

void write_wind_comparison(const ensemble_engine::WindComparison& cmp, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw core::IoError("cannot create output directory '" + out_dir.string() + "'");
    std::ofstream out = open_out(out_dir / "comparison.csv");
    out << "p_percent,wind_model,mean_up_gwh,mode_up_gwh,median_up_gwh\n";
    auto emit = [&](const ExperimentResults& r, const char* label) {
        for (size_t pi = 0; pi < r.p_percent.size(); ++pi) {
            const auto& v = r.daily_up_volume_gwh[pi];
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            const double mode = *hi > *lo ? histogram_mode(v) : *lo;
            out << fmt(r.p_percent[pi]) << ',' << label << ',' << fmt(mean(v)) << ',' << fmt(mode) << ','
                << fmt(quantile(v, 0.5)) << '\n';
        }
    };
    emit(cmp.gaussian, "gaussian");
    emit(cmp.weibull, "weibull");
}

} // namespace reporting
