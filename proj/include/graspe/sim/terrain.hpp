#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspe/core/rng.hpp"
#include "graspe/core/types.hpp"

namespace graspe::sim {

enum class Cell : std::uint8_t { Free = 0, Solid = 1, Pliable = 2, NonTrav = 3 };

enum class Difficulty : int { Open = 0, Cluttered = 1, Dark = 2, Occluded = 3, Combined = 4 };

inline const char* difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::Open: return "open";
        case Difficulty::Cluttered: return "cluttered";
        case Difficulty::Dark: return "dark";
        case Difficulty::Occluded: return "occluded";
        case Difficulty::Combined: return "combined";
    }
    throw std::invalid_argument("difficulty_name: bad value");
}

inline Difficulty difficulty_from_name(const std::string& s) {
    for (int i = 0; i <= 4; ++i)
        if (s == difficulty_name(static_cast<Difficulty>(i))) return static_cast<Difficulty>(i);
    throw std::invalid_argument("unknown difficulty: " + s);
}

struct OcclusionPatch {
    int x{0}, y{0}, w{0}, h{0}; // image-space rectangle
};

struct TerrainGrid {
    int width{0}, height{0};
    double cell_size{0.25};
    std::vector<Cell> cells; // row-major [cy * width + cx]
    double illumination{1.0};
    int blur_radius{0};
    std::vector<OcclusionPatch> occlusions;
    int start_cx{0}, start_cy{0};
    int goal_cx{0}, goal_cy{0};

    bool in_bounds_cell(int cx, int cy) const {
        return cx >= 0 && cx < width && cy >= 0 && cy < height;
    }

    Cell at(int cx, int cy) const {
        if (!in_bounds_cell(cx, cy)) throw std::out_of_range("TerrainGrid::at: cell out of bounds");
        return cells[static_cast<std::size_t>(cy) * width + cx];
    }

    void set(int cx, int cy, Cell c) {
        if (!in_bounds_cell(cx, cy)) throw std::out_of_range("TerrainGrid::set: cell out of bounds");
        cells[static_cast<std::size_t>(cy) * width + cx] = c;
    }

    // World coordinates outside the grid read as Solid.
    Cell at_world(double x, double y) const {
        const int cx = static_cast<int>(std::floor(x / cell_size));
        const int cy = static_cast<int>(std::floor(y / cell_size));
        if (!in_bounds_cell(cx, cy)) return Cell::Solid;
        return cells[static_cast<std::size_t>(cy) * width + cx];
    }

    bool in_bounds_world(double x, double y) const {
        return x >= 0.0 && y >= 0.0 && x < width * cell_size && y < height * cell_size;
    }

    double cell_center_x(int cx) const { return (cx + 0.5) * cell_size; }
    double cell_center_y(int cy) const { return (cy + 0.5) * cell_size; }

    Pose2D start_pose() const {
        const double sx = cell_center_x(start_cx);
        const double sy = cell_center_y(start_cy);
        const double gx = cell_center_x(goal_cx);
        const double gy = cell_center_y(goal_cy);
        return Pose2D(sx, sy, std::atan2(gy - sy, gx - sx));
    }

    std::pair<double, double> goal_xy() const {
        return {cell_center_x(goal_cx), cell_center_y(goal_cy)};
    }
};

// Frozen difficulty preset table (version 1). Acceptance runs reference
// these rows; change the version when changing any value.
struct DifficultyPreset {
    double illumination{1.0};
    int blur_radius{0};
    int n_occlusions{0};
    double occlusion_frac{0.0}; // per-patch fraction of image width/height
    int n_belts{0};             // shallow full-height pliable belts
    double p_belt_gap{0.25};    // chance a belt has a free-corridor gap
    double p_belt_trap{0.85};   // chance a belt carries a brush trap on the corridor
    double p_extra_trap{0.5};   // chance of a second off-corridor trap per belt
    int pillars_min{0}, pillars_max{0};
    int field_brush_min{0}, field_brush_max{0}; // free-standing brush blobs
};

struct WorldParams {
    int grid_width{48};
    int grid_height{48};
    double cell_size{0.25};
    int max_generation_attempts{64};
    int preset_version{1};

    std::array<DifficultyPreset, 5> presets{{
        // open: empty arena, perfect sensing
        {1.0, 0, 0, 0.0, 0, 0.0, 0.0, 0.0, 0, 0, 0, 0},
        // cluttered: pliable belts with brush traps + pillars + field brush
        {1.0, 0, 0, 0.0, 2, 0.25, 0.85, 0.5, 3, 5, 1, 2},
        // dark: cluttered geometry under low light
        {0.15, 0, 0, 0.0, 2, 0.25, 0.85, 0.5, 3, 5, 1, 2},
        // occluded: cluttered geometry with camera patches
        {1.0, 0, 2, 0.45, 2, 0.25, 0.85, 0.5, 3, 5, 1, 2},
        // combined: clutter + dim light + occlusion + blur
        {0.35, 1, 1, 0.45, 2, 0.25, 0.85, 0.5, 3, 5, 1, 2},
    }};

    const DifficultyPreset& preset(Difficulty d) const {
        return presets[static_cast<std::size_t>(d)];
    }
};

namespace detail {

inline bool traversable(Cell c) { return c == Cell::Free || c == Cell::Pliable; }

inline bool path_exists(const TerrainGrid& g) {
    std::vector<char> seen(static_cast<std::size_t>(g.width) * g.height, 0);
    std::deque<std::pair<int, int>> q;
    q.emplace_back(g.start_cx, g.start_cy);
    seen[static_cast<std::size_t>(g.start_cy) * g.width + g.start_cx] = 1;
    while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop_front();
        if (cx == g.goal_cx && cy == g.goal_cy) return true;
        static const int dx[4] = {1, -1, 0, 0};
        static const int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = cx + dx[k], ny = cy + dy[k];
            if (!g.in_bounds_cell(nx, ny)) continue;
            auto& s = seen[static_cast<std::size_t>(ny) * g.width + nx];
            if (s || !traversable(g.at(nx, ny))) continue;
            s = 1;
            q.emplace_back(nx, ny);
        }
    }
    return false;
}

inline void fill_rect(TerrainGrid& g, int x0, int y0, int w, int h, Cell c) {
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x)
            if (g.in_bounds_cell(x, y)) g.set(x, y, c);
}

inline void clear_disk(TerrainGrid& g, int cx, int cy, int radius) {
    for (int y = cy - radius; y <= cy + radius; ++y)
        for (int x = cx - radius; x <= cx + radius; ++x)
            if (g.in_bounds_cell(x, y) && x > 0 && x < g.width - 1 && y > 0 && y < g.height - 1)
                g.set(x, y, Cell::Free);
}

} // namespace detail

// Builds one candidate layout; generate_world rejection-samples these until
// a traversable start->goal path exists.
inline TerrainGrid build_candidate(Rng& rng, Difficulty difficulty, const WorldParams& params) {
    const DifficultyPreset& p = params.preset(difficulty);
    TerrainGrid g;
    g.width = params.grid_width;
    g.height = params.grid_height;
    g.cell_size = params.cell_size;
    g.cells.assign(static_cast<std::size_t>(g.width) * g.height, Cell::Free);
    g.illumination = p.illumination;
    g.blur_radius = p.blur_radius;

    // Solid border ring keeps the robot and all rollouts inside.
    for (int x = 0; x < g.width; ++x) {
        g.set(x, 0, Cell::Solid);
        g.set(x, g.height - 1, Cell::Solid);
    }
    for (int y = 0; y < g.height; ++y) {
        g.set(0, y, Cell::Solid);
        g.set(g.width - 1, y, Cell::Solid);
    }

    g.start_cx = 3;
    g.start_cy = rng.uniform_int(g.height / 4, 3 * g.height / 4);
    g.goal_cx = g.width - 4;
    g.goal_cy = rng.uniform_int(g.height / 4, 3 * g.height / 4);

    // Shallow pliable belts span the full height. Most carry a deep
    // non-traversable brush trap centered where the straight start-goal line
    // crosses the belt; the trap protrudes behind the grass so lingering in
    // it ends the episode.
    for (int b = 0; b < p.n_belts; ++b) {
        const int span = (g.width - 18) / std::max(1, p.n_belts);
        const int x0 = 10 + b * span + rng.uniform_int(0, std::max(1, span - 6));
        const int thickness = rng.uniform_int(2, 3);
        detail::fill_rect(g, x0, 1, thickness, g.height - 2, Cell::Pliable);
        if (rng.next_double() < p.p_belt_gap) {
            const int gap_y = rng.uniform_int(4, g.height - 8);
            detail::fill_rect(g, x0, gap_y, thickness, 3, Cell::Free);
        }
        if (rng.next_double() < p.p_belt_trap) {
            // y where the start-goal line crosses this belt
            const double t = (x0 + 0.5 * thickness - g.start_cx) /
                             static_cast<double>(g.goal_cx - g.start_cx);
            const int line_y = static_cast<int>(std::lround(g.start_cy + t * (g.goal_cy - g.start_cy)));
            const int trap_y = line_y + rng.uniform_int(-1, 1);
            const int trap_len = rng.uniform_int(3, 4);
            const int trap_depth = rng.uniform_int(5, 6);
            detail::fill_rect(g, x0 - 1, trap_y - trap_len / 2, trap_depth, trap_len, Cell::NonTrav);
        }
        if (rng.next_double() < p.p_extra_trap) {
            const int trap_y = rng.uniform_int(4, g.height - 8);
            detail::fill_rect(g, x0 - 1, trap_y, rng.uniform_int(4, 5), 3, Cell::NonTrav);
        }
    }

    if (p.field_brush_max > 0) {
        const int n_brush = rng.uniform_int(p.field_brush_min, p.field_brush_max);
        for (int i = 0; i < n_brush; ++i) {
            const int bx = rng.uniform_int(8, g.width - 12);
            const int by = rng.uniform_int(4, g.height - 8);
            const int bw = rng.uniform_int(3, 4), bh = rng.uniform_int(3, 4);
            bool clear = true;
            for (int y = by; y < by + bh && clear; ++y)
                for (int x = bx; x < bx + bw && clear; ++x)
                    if (g.in_bounds_cell(x, y) && g.at(x, y) != Cell::Free) clear = false;
            if (clear) detail::fill_rect(g, bx, by, bw, bh, Cell::NonTrav);
        }
    }

    if (p.pillars_max > 0) {
        const int n_pillars = rng.uniform_int(p.pillars_min, p.pillars_max);
        for (int i = 0; i < n_pillars; ++i) {
            const int px = rng.uniform_int(8, g.width - 9);
            const int py = rng.uniform_int(4, g.height - 6);
            const int pw = rng.uniform_int(1, 2), ph = rng.uniform_int(1, 2);
            // keep pillars out of the belts so they stay lidar-visible
            bool clear = true;
            for (int y = py - 2; y < py + ph + 2 && clear; ++y)
                for (int x = px - 2; x < px + pw + 2 && clear; ++x)
                    if (g.in_bounds_cell(x, y) && g.at(x, y) != Cell::Free) clear = false;
            if (clear) detail::fill_rect(g, px, py, pw, ph, Cell::Solid);
        }
    }

    detail::clear_disk(g, g.start_cx, g.start_cy, 3);
    detail::clear_disk(g, g.goal_cx, g.goal_cy, 3);

    for (int i = 0; i < p.n_occlusions; ++i) {
        // Image-space patch; dimensions resolved against the camera raster
        // at render time via fractional coords scaled by 64 (default dims).
        OcclusionPatch patch;
        const int side = static_cast<int>(p.occlusion_frac * 64);
        patch.w = side;
        patch.h = side;
        patch.x = rng.uniform_int(0, 64 - side);
        patch.y = rng.uniform_int(0, 64 - side);
        g.occlusions.push_back(patch);
    }

    return g;
}

inline TerrainGrid generate_world(std::uint64_t seed, Difficulty difficulty,
                                  const WorldParams& params = WorldParams{}) {
    Rng rng(mix_seed(seed, 0x57ULL + static_cast<std::uint64_t>(difficulty)));
    for (int attempt = 0; attempt < params.max_generation_attempts; ++attempt) {
        TerrainGrid g = build_candidate(rng, difficulty, params);
        if (g.at(g.start_cx, g.start_cy) == Cell::Free && g.at(g.goal_cx, g.goal_cy) == Cell::Free &&
            detail::path_exists(g))
            return g;
    }
    throw std::runtime_error("generate_world: no traversable world found within attempt bound");
}

// ---- plain-text world format ----------------------------------------------
// Header line: width height cell_size illumination blur_radius
// Then one class character per cell, row by row:
//   '.' free, '#' solid, 'p' pliable, 'n' non-traversable,
//   'S' start (free), 'G' goal (free)
// Trailing records: "occlusion x y w h", one per patch.

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline std::string save_world(const TerrainGrid& g) {
    std::string out;
    out += std::to_string(g.width) + " " + std::to_string(g.height) + " " +
           detail::format_double(g.cell_size) + " " + detail::format_double(g.illumination) + " " +
           std::to_string(g.blur_radius) + "\n";
    for (int cy = 0; cy < g.height; ++cy) {
        for (int cx = 0; cx < g.width; ++cx) {
            char ch = '.';
            switch (g.at(cx, cy)) {
                case Cell::Free: ch = '.'; break;
                case Cell::Solid: ch = '#'; break;
                case Cell::Pliable: ch = 'p'; break;
                case Cell::NonTrav: ch = 'n'; break;
            }
            if (cx == g.start_cx && cy == g.start_cy) ch = 'S';
            if (cx == g.goal_cx && cy == g.goal_cy) ch = 'G';
            out += ch;
        }
        out += '\n';
    }
    for (const auto& o : g.occlusions)
        out += "occlusion " + std::to_string(o.x) + " " + std::to_string(o.y) + " " +
               std::to_string(o.w) + " " + std::to_string(o.h) + "\n";
    return out;
}

inline TerrainGrid load_world(std::istream& in) {
    TerrainGrid g;
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("load_world: missing header");
    {
        std::istringstream hs(header);
        if (!(hs >> g.width >> g.height >> g.cell_size >> g.illumination >> g.blur_radius))
            throw std::runtime_error("load_world: bad header");
    }
    if (g.width <= 0 || g.height <= 0) throw std::runtime_error("load_world: bad dims");
    g.cells.assign(static_cast<std::size_t>(g.width) * g.height, Cell::Free);
    for (int cy = 0; cy < g.height; ++cy) {
        std::string row;
        if (!std::getline(in, row) || static_cast<int>(row.size()) < g.width)
            throw std::runtime_error("load_world: short grid row");
        for (int cx = 0; cx < g.width; ++cx) {
            switch (row[cx]) {
                case '.': g.set(cx, cy, Cell::Free); break;
                case '#': g.set(cx, cy, Cell::Solid); break;
                case 'p': g.set(cx, cy, Cell::Pliable); break;
                case 'n': g.set(cx, cy, Cell::NonTrav); break;
                case 'S':
                    g.set(cx, cy, Cell::Free);
                    g.start_cx = cx;
                    g.start_cy = cy;
                    break;
                case 'G':
                    g.set(cx, cy, Cell::Free);
                    g.goal_cx = cx;
                    g.goal_cy = cy;
                    break;
                default: throw std::runtime_error("load_world: unknown cell char");
            }
        }
    }
    std::string rec;
    while (std::getline(in, rec)) {
        if (rec.empty()) continue;
        std::istringstream rs(rec);
        std::string tag;
        rs >> tag;
        if (tag != "occlusion") throw std::runtime_error("load_world: unknown record " + tag);
        OcclusionPatch o;
        if (!(rs >> o.x >> o.y >> o.w >> o.h)) throw std::runtime_error("load_world: bad occlusion");
        g.occlusions.push_back(o);
    }
    return g;
}

inline TerrainGrid load_world_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_world_file: cannot open " + path);
    return load_world(in);
}

} // namespace graspe::sim
