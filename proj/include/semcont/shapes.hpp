#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "semcont/errors.hpp"
#include "semcont/image.hpp"
#include "semcont/rng.hpp"

namespace semcont {

enum class ShapeKind { triangle, circle, morph };

// One uniform shape centred on a uniform background. morph_t only applies to
// kind == morph: 0 is the circle, 1 the sharp equilateral triangle.
struct ShapeSpec {
    ShapeKind kind = ShapeKind::circle;
    double morph_t = 0.0;
    double rotation_deg = 0.0;
    double fill_level = 0.1;
    double background_level = 0.9;
    double circumradius_px = 20.0;
    double center_x = 32.0;
    double center_y = 32.0;

    double contrast() const { return std::abs(fill_level - background_level); }
};

enum class SeriesKind { rotation, contrast, transition };

inline const char* to_string(SeriesKind k) {
    switch (k) {
        case SeriesKind::rotation: return "rotation";
        case SeriesKind::contrast: return "contrast";
        case SeriesKind::transition: return "transition";
    }
    return "?";
}

// Ordered frames x_0..x_n with strictly increasing variation indicators.
// frames[0] is bit-identical to reference: theta_0 is the identity transform.
struct VariationSeries {
    SeriesKind kind = SeriesKind::rotation;
    std::string id;
    Image reference;
    std::vector<Image> frames;
    std::vector<double> thetas;
    ShapeSpec base;
    std::map<std::string, double> params;

    void validate() const {
        if (frames.size() != thetas.size())
            throw data_error("series: frames/thetas length mismatch");
        if (frames.empty()) throw data_error("series: empty");
        for (std::size_t i = 1; i < thetas.size(); ++i)
            if (!(thetas[i] > thetas[i - 1]))
                throw data_error("series: thetas not strictly increasing");
        if (!(frames[0] == reference))
            throw data_error("series: frame 0 differs from reference");
    }
};

namespace detail {

struct Vec2 {
    double x, y;
};

inline double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline std::array<Vec2, 3> triangle_vertices(double cx, double cy, double circumradius,
                                             double rotation_deg) {
    std::array<Vec2, 3> v;
    for (int k = 0; k < 3; ++k) {
        const double deg = rotation_deg + 120.0 * k - 90.0;
        const double rad = deg * (3.14159265358979323846 / 180.0);
        v[k] = {cx + circumradius * std::cos(rad), cy + circumradius * std::sin(rad)};
    }
    return v;
}

inline bool inside_triangle(const std::array<Vec2, 3>& v, const Vec2& p) {
    const double c0 = cross(v[0], v[1], p);
    const double c1 = cross(v[1], v[2], p);
    const double c2 = cross(v[2], v[0], p);
    const bool any_neg = c0 < 0 || c1 < 0 || c2 < 0;
    const bool any_pos = c0 > 0 || c1 > 0 || c2 > 0;
    return !(any_neg && any_pos);
}

inline double segment_dist_sq(const Vec2& a, const Vec2& b, const Vec2& p) {
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double dx = p.x - a.x, dy = p.y - a.y;
    const double ee = ex * ex + ey * ey;
    double h = ee > 0.0 ? (dx * ex + dy * ey) / ee : 0.0;
    h = h < 0.0 ? 0.0 : (h > 1.0 ? 1.0 : h);
    const double rx = dx - h * ex, ry = dy - h * ey;
    return rx * rx + ry * ry;
}

// Rounded-corner equilateral triangle: Minkowski sum of a shrunk triangle
// (circumradius R*t) with a disk of radius R*(1-t). t=0 is the exact circle,
// t=1 the sharp triangle; outer circumradius stays R for all t.
struct MorphGeometry {
    std::array<Vec2, 3> core;
    double corner_radius_sq;
    bool is_circle;
    Vec2 center;
    double radius;

    MorphGeometry(const ShapeSpec& s) {
        const double t = s.morph_t;
        const double corner_radius = s.circumradius_px * (1.0 - t);
        const double core_radius = s.circumradius_px * t;
        center = {s.center_x, s.center_y};
        is_circle = core_radius <= 0.0;
        radius = corner_radius;
        corner_radius_sq = corner_radius * corner_radius;
        core = triangle_vertices(s.center_x, s.center_y, core_radius, s.rotation_deg);
    }

    bool contains(const Vec2& p) const {
        if (is_circle) {
            const double dx = p.x - center.x, dy = p.y - center.y;
            return dx * dx + dy * dy <= radius * radius;
        }
        if (inside_triangle(core, p)) return true;
        return segment_dist_sq(core[0], core[1], p) <= corner_radius_sq ||
               segment_dist_sq(core[1], core[2], p) <= corner_radius_sq ||
               segment_dist_sq(core[2], core[0], p) <= corner_radius_sq;
    }
};

}  // namespace detail

// Anti-aliased rasterization: pixel value is the 4x4-supersampled coverage
// blend of fill over background. Pure function of its ShapeSpec argument.
inline Image render(const ShapeSpec& spec, int width = 64, int height = 64) {
    if (spec.fill_level < 0.0 || spec.fill_level > 1.0 || spec.background_level < 0.0 ||
        spec.background_level > 1.0)
        throw data_error("render: fill/background outside [0,1]");
    if (spec.kind == ShapeKind::morph && (spec.morph_t < 0.0 || spec.morph_t > 1.0))
        throw data_error("render: morph_t outside [0,1]");
    const double r = spec.circumradius_px;
    if (spec.center_x - r < 0.0 || spec.center_x + r > width || spec.center_y - r < 0.0 ||
        spec.center_y + r > height)
        throw data_error("render: shape exceeds canvas");

    const auto tri =
        detail::triangle_vertices(spec.center_x, spec.center_y, r, spec.rotation_deg);
    const detail::MorphGeometry morph(spec);
    const double r_sq = r * r;

    auto inside = [&](const detail::Vec2& p) {
        switch (spec.kind) {
            case ShapeKind::circle: {
                const double dx = p.x - spec.center_x, dy = p.y - spec.center_y;
                return dx * dx + dy * dy <= r_sq;
            }
            case ShapeKind::triangle:
                return detail::inside_triangle(tri, p);
            case ShapeKind::morph:
                return morph.contains(p);
        }
        return false;
    };

    constexpr int kSub = 4;
    Image out(width, height);
    for (int py = 0; py < height; ++py) {
        for (int px = 0; px < width; ++px) {
            int hit = 0;
            for (int sy = 0; sy < kSub; ++sy)
                for (int sx = 0; sx < kSub; ++sx) {
                    const detail::Vec2 p{px + (sx + 0.5) / kSub, py + (sy + 0.5) / kSub};
                    if (inside(p)) ++hit;
                }
            const double coverage = hit / static_cast<double>(kSub * kSub);
            out.at(py, px) = static_cast<float>(spec.background_level * (1.0 - coverage) +
                                                spec.fill_level * coverage);
        }
    }
    return out;
}

namespace detail {

inline void require_frames(int n_frames) {
    if (n_frames < 2) throw data_error("series: n_frames must be >= 2");
}

inline std::string series_id(SeriesKind kind, const ShapeSpec& base, int n_frames) {
    std::string id = to_string(kind);
    id += base.kind == ShapeKind::circle ? "_circle" : "_triangle";
    id += "_n" + std::to_string(n_frames);
    return id;
}

}  // namespace detail

// Frame i is the base triangle rotated by theta_i = i*total_deg/(n_frames-1).
inline VariationSeries make_rotation_series(const ShapeSpec& base, int n_frames = 100,
                                            double total_deg = 120.0) {
    if (base.kind != ShapeKind::triangle)
        throw data_error("rotation series: base must be a triangle");
    detail::require_frames(n_frames);
    VariationSeries s;
    s.kind = SeriesKind::rotation;
    s.base = base;
    s.id = detail::series_id(s.kind, base, n_frames);
    s.params = {{"n_frames", static_cast<double>(n_frames)}, {"total_deg", total_deg}};
    s.reference = render(base);
    for (int i = 0; i < n_frames; ++i) {
        const double theta = (i * total_deg) / (n_frames - 1);
        ShapeSpec frame_spec = base;
        frame_spec.rotation_deg = base.rotation_deg + theta;
        s.thetas.push_back(theta);
        s.frames.push_back(render(frame_spec));
    }
    s.validate();
    return s;
}

// Frame i interpolates fill toward background; theta_i = i/(n_frames-1) is the
// contrast reduction fraction. The last frame is the uniform background.
inline VariationSeries make_contrast_series(const ShapeSpec& base, int n_frames = 100) {
    if (!(base.contrast() > 0.0)) throw data_error("contrast series: base contrast is zero");
    detail::require_frames(n_frames);
    VariationSeries s;
    s.kind = SeriesKind::contrast;
    s.base = base;
    s.id = detail::series_id(s.kind, base, n_frames);
    s.params = {{"n_frames", static_cast<double>(n_frames)}};
    s.reference = render(base);
    for (int i = 0; i < n_frames; ++i) {
        const double u = static_cast<double>(i) / (n_frames - 1);
        ShapeSpec frame_spec = base;
        frame_spec.fill_level = base.fill_level * (1.0 - u) + base.background_level * u;
        s.thetas.push_back(u);
        s.frames.push_back(render(frame_spec));
    }
    s.validate();
    return s;
}

// Circle-to-triangle morph at fixed rotation and contrast; theta_i = t.
inline VariationSeries make_transition_series(const ShapeSpec& base_circle, int n_frames = 100) {
    if (base_circle.kind != ShapeKind::circle)
        throw data_error("transition series: base must be a circle");
    detail::require_frames(n_frames);
    VariationSeries s;
    s.kind = SeriesKind::transition;
    s.base = base_circle;
    s.id = detail::series_id(s.kind, base_circle, n_frames);
    s.params = {{"n_frames", static_cast<double>(n_frames)}};
    s.reference = render(base_circle);
    for (int i = 0; i < n_frames; ++i) {
        const double t = static_cast<double>(i) / (n_frames - 1);
        ShapeSpec frame_spec = base_circle;
        frame_spec.kind = ShapeKind::morph;
        frame_spec.morph_t = t;
        s.thetas.push_back(t);
        s.frames.push_back(render(frame_spec));
    }
    s.validate();
    return s;
}

struct LabeledImage {
    Image image;
    int label;  // 0 = circle, 1 = triangle
};

// Balanced triangle/circle set with randomized rotation, size and contrast.
// Alternating labels so any prefix/suffix split stays balanced.
inline std::vector<LabeledImage> make_training_set(int n_per_class, std::uint64_t seed) {
    if (n_per_class < 1) throw data_error("training set: n_per_class must be >= 1");
    Rng rng(seed);
    std::vector<LabeledImage> out;
    out.reserve(2 * static_cast<std::size_t>(n_per_class));
    for (int i = 0; i < 2 * n_per_class; ++i) {
        ShapeSpec spec;
        spec.kind = (i % 2 == 0) ? ShapeKind::triangle : ShapeKind::circle;
        spec.rotation_deg = rng.uniform(0.0, 360.0);
        spec.circumradius_px = rng.uniform(10.0, 24.0);
        const double contrast = rng.uniform(0.3, 1.0);
        spec.fill_level = 0.5 - contrast / 2.0;
        spec.background_level = 0.5 + contrast / 2.0;
        out.push_back({render(spec), spec.kind == ShapeKind::triangle ? 1 : 0});
    }
    return out;
}

}  // namespace semcont
