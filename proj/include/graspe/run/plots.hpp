#pragma once

#include <string>
#include <vector>

#include "graspe/run/eval.hpp"
#include "graspe/run/training.hpp"
#include "graspe/sim/sensors.hpp"

namespace graspe::run {

// Top-down SVG of one episode: terrain cells, executed path, start/goal
// markers. Deterministic text output.
inline std::string episode_svg(const EpisodeReport& rep, const ProjectConfig& cfg) {
    const sim::TerrainGrid grid = sim::generate_world(rep.world_seed, rep.difficulty, cfg.world);
    const int px = 12; // pixels per cell
    const int w = grid.width * px, h = grid.height * px;
    auto cell_fill = [](sim::Cell c) -> const char* {
        switch (c) {
            case sim::Cell::Free: return "#e8e3d8";
            case sim::Cell::Solid: return "#3c3c3c";
            case sim::Cell::Pliable: return "#8fce6b";
            case sim::Cell::NonTrav: return "#2f6e2f";
        }
        return "#e8e3d8";
    };
    // world y points up; svg y points down
    auto sx = [&](double x) { return fmt_double(x / grid.cell_size * px); };
    auto sy = [&](double y) { return fmt_double(h - y / grid.cell_size * px); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                      "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
                      " " + std::to_string(h) + "\">\n";
    for (int cy = 0; cy < grid.height; ++cy)
        for (int cx = 0; cx < grid.width; ++cx) {
            const sim::Cell c = grid.at(cx, cy);
            if (c == sim::Cell::Free) continue;
            svg += "<rect x=\"" + std::to_string(cx * px) + "\" y=\"" +
                   std::to_string(h - (cy + 1) * px) + "\" width=\"" + std::to_string(px) +
                   "\" height=\"" + std::to_string(px) + "\" fill=\"" + cell_fill(c) + "\"/>\n";
        }
    svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
           "\" fill=\"none\" stroke=\"#888\"/>\n";

    svg += "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"3\" points=\"";
    for (std::size_t i = 0; i < rep.path.size(); ++i) {
        if (i > 0) svg += " ";
        svg += sx(rep.path[i].first) + "," + sy(rep.path[i].second);
    }
    svg += "\"/>\n";

    const Pose2D start = grid.start_pose();
    auto [gx, gy] = grid.goal_xy();
    svg += "<circle cx=\"" + sx(start.x) + "\" cy=\"" + sy(start.y) +
           "\" r=\"8\" fill=\"#2980b9\"/>\n";
    svg += "<circle cx=\"" + sx(gx) + "\" cy=\"" + sy(gy) +
           "\" r=\"8\" fill=\"none\" stroke=\"#27ae60\" stroke-width=\"4\"/>\n";
    svg += "<text x=\"6\" y=\"16\" font-family=\"monospace\" font-size=\"14\">" +
           std::string(suite_name(rep.suite)) + " / " + sim::difficulty_name(rep.difficulty) +
           " #" + std::to_string(rep.episode_index) + " " + sim::status_name(rep.status) +
           "</text>\n";
    svg += "</svg>\n";
    return svg;
}

inline std::string summary_csv(const std::vector<EpisodeReport>& reports,
                               const std::vector<Suite>& suites,
                               const std::vector<sim::Difficulty>& difficulties) {
    std::string csv = "suite,difficulty,episodes,success_rate,norm_len_success,norm_len_fail,mean_vetoes\n";
    for (const Suite s : suites)
        for (const sim::Difficulty d : difficulties) {
            const SuiteSummary sum = summarize(reports, s, d);
            if (sum.episodes == 0) continue;
            csv += std::string(suite_name(s)) + "," + sim::difficulty_name(d) + "," +
                   std::to_string(sum.episodes) + "," + fmt_double(sum.success_rate) + "," +
                   fmt_double(sum.norm_len_success) + "," + fmt_double(sum.norm_len_fail) + "," +
                   fmt_double(sum.mean_vetoes) + "\n";
        }
    return csv;
}

// JSONL round trip for episode reports so `plot` can run from `eval` output.
inline std::string reports_jsonl(const std::vector<EpisodeReport>& reports) {
    std::string out;
    for (const auto& r : reports) {
        json j{{"suite", suite_name(r.suite)},
               {"difficulty", sim::difficulty_name(r.difficulty)},
               {"episode_index", r.episode_index},
               {"world_seed", r.world_seed},
               {"status", sim::status_name(r.status)},
               {"steps", r.steps},
               {"path_length", r.path_length},
               {"straight_dist", r.straight_dist},
               {"normalized_length", r.normalized_length},
               {"vetoes", r.vetoes},
               {"recoveries", r.recoveries},
               {"r_img_trace", r.r_img_trace},
               {"r_point_trace", r.r_point_trace}};
        json path = json::array();
        for (const auto& [x, y] : r.path) path.push_back(json::array({x, y}));
        j["path"] = std::move(path);
        out += j.dump() + "\n";
    }
    return out;
}

inline std::vector<EpisodeReport> parse_reports_jsonl(const std::string& text) {
    std::vector<EpisodeReport> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        EpisodeReport r;
        r.suite = suite_from_name(j.at("suite").get<std::string>());
        r.difficulty = sim::difficulty_from_name(j.at("difficulty").get<std::string>());
        r.episode_index = j.at("episode_index").get<int>();
        r.world_seed = j.at("world_seed").get<std::uint64_t>();
        const std::string st = j.at("status").get<std::string>();
        for (int i = 0; i <= 4; ++i)
            if (st == sim::status_name(static_cast<sim::Status>(i)))
                r.status = static_cast<sim::Status>(i);
        r.steps = j.at("steps").get<int>();
        r.path_length = j.at("path_length").get<double>();
        r.straight_dist = j.at("straight_dist").get<double>();
        r.normalized_length = j.at("normalized_length").get<double>();
        r.vetoes = j.at("vetoes").get<int>();
        r.recoveries = j.at("recoveries").get<int>();
        r.r_img_trace = j.at("r_img_trace").get<std::vector<double>>();
        r.r_point_trace = j.at("r_point_trace").get<std::vector<double>>();
        for (const auto& p : j.at("path")) r.path.emplace_back(p[0].get<double>(), p[1].get<double>());
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace graspe::run
