#include "rfgate/geometry.hpp"

#include "rfgate/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rfgate {

namespace {

constexpr double kHalfPi = 1.5707963267948966;
constexpr double kGrazingGuard = 1e-12; // rad below pi/2 still usable

double hypot2(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace

Scene Scene::standard_doorway(double d_door, int tag_count, double d_set,
                              double board_distance, double board_center_x) {
    Scene sc;
    sc.d_door = d_door;
    sc.d_set = d_set;
    sc.antenna = {-d_door / 2.0, 0.0};
    sc.tags.resize(static_cast<std::size_t>(tag_count));
    const double x0 = board_center_x - d_set * (tag_count - 1) / 2.0;
    for (int i = 0; i < tag_count; ++i)
        sc.tags[static_cast<std::size_t>(i)] = {x0 + d_set * i, board_distance};
    sc.validate();
    return sc;
}

int Scene::reference_tag() const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < tag_count(); ++i) {
        const double d = std::hypot(tags[static_cast<std::size_t>(i)].x,
                                    tags[static_cast<std::size_t>(i)].y);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::pair<Vec2, Vec2> Scene::tag_endpoints(int tag_index) const {
    if (tag_index < 0 || tag_index >= tag_count())
        throw std::invalid_argument("tag_endpoints: tag index out of range");
    const Vec2 p = tags[static_cast<std::size_t>(tag_index)];
    if (l_tag <= 0.0) return {p, p};
    // Board direction from the tag row itself; a single tag lies along x.
    Vec2 dir{1.0, 0.0};
    if (tag_count() >= 2) {
        const Vec2 a = tags.front();
        const Vec2 b = tags.back();
        const double len = hypot2(a, b);
        if (len > 0.0) dir = {(b.x - a.x) / len, (b.y - a.y) / len};
    }
    const double h = l_tag / 2.0;
    return {Vec2{p.x - dir.x * h, p.y - dir.y * h},
            Vec2{p.x + dir.x * h, p.y + dir.y * h}};
}

void Scene::validate() const {
    if (!(d_door > 0.0)) throw std::invalid_argument("scene: d_door must be > 0");
    if (!(d_set > 0.0)) throw std::invalid_argument("scene: d_set must be > 0");
    if (l_tag < 0.0) throw std::invalid_argument("scene: l_tag must be >= 0");
    if (tags.empty()) throw std::invalid_argument("scene: needs at least one tag");
    for (std::size_t i = 0; i + 1 < tags.size(); ++i) {
        const double gap = hypot2(tags[i], tags[i + 1]);
        if (std::abs(gap - d_set) > 1e-9)
            throw std::invalid_argument("scene: tags not equally spaced by d_set");
    }
    for (std::size_t i = 0; i < tags.size(); ++i)
        for (std::size_t j = i + 1; j < tags.size(); ++j)
            if (hypot2(tags[i], tags[j]) == 0.0)
                throw std::invalid_argument("scene: duplicate tag positions");
}

std::uint64_t Scene::digest() const {
    std::string blob = "scene/v1\n";
    blob += fmt_full(d_door) + "," + fmt_full(d_set) + "," + fmt_full(l_tag) + "\n";
    blob += fmt_full(antenna.x) + "," + fmt_full(antenna.y) + "\n";
    for (const Vec2& p : tags)
        blob += fmt_full(p.x) + "," + fmt_full(p.y) + "\n";
    return fnv1a64(blob);
}

void MovingObject::validate(const Scene& scene) const {
    if (l_h < 0.0 || d_h < 0.0)
        throw std::invalid_argument("object: l_h and d_h must be >= 0");
    if (!(v > 0.0)) throw std::invalid_argument("object: v must be > 0");
    if (std::abs(path_offset) + l_h / 2.0 > scene.d_door / 2.0 + 1e-12)
        throw std::invalid_argument("object: does not fit inside the doorway");
}

SightAngles sight_angles(const Scene& scene, int tag_index) {
    if (tag_index < 0 || tag_index >= scene.tag_count())
        throw std::invalid_argument("sight_angles: tag index out of range");
    const auto [e1, e2] = scene.tag_endpoints(tag_index);
    auto elevation = [&](const Vec2& e) {
        const double dx = e.x - scene.antenna.x;
        const double dy = e.y - scene.antenna.y;
        if (dx == 0.0 && dy == 0.0)
            throw std::invalid_argument("sight_angles: antenna coincides with tag");
        return std::atan2(std::abs(dy), std::abs(dx));
    };
    const double a1 = elevation(e1);
    const double a2 = elevation(e2);
    return {std::min(a1, a2), std::max(a1, a2)};
}

double impact_distance(const Scene& scene, const MovingObject& obj,
                       double theta_a, double theta_b, bool* clamped) {
    for (double th : {theta_a, theta_b}) {
        if (th < 0.0 || th > kHalfPi)
            throw std::invalid_argument("impact_distance: angle outside [0, pi/2]");
        if (kHalfPi - th < kGrazingGuard)
            throw std::invalid_argument("impact_distance: grazing angle, tangent singular");
    }
    const double span = 0.5 * (scene.d_door + obj.l_h) * std::tan(theta_b) -
                        0.5 * (scene.d_door - obj.l_h) * std::tan(theta_a) +
                        obj.d_h;
    if (clamped) *clamped = span < 0.0;
    return std::max(span, 0.0);
}

double impact_time(double d_in, double v) {
    if (!(v > 0.0)) throw std::invalid_argument("impact_time: v must be > 0");
    if (d_in < 0.0) throw std::invalid_argument("impact_time: d_in must be >= 0");
    return d_in / v;
}

std::vector<OcclusionWindow> occlusion_windows(const Scene& scene,
                                               const MovingObject& obj) {
    scene.validate();
    obj.validate(scene);

    const double strip_lo = obj.path_offset - obj.l_h / 2.0;
    const double strip_hi = obj.path_offset + obj.l_h / 2.0;

    std::vector<OcclusionWindow> out;
    out.reserve(static_cast<std::size_t>(scene.tag_count()));

    for (int i = 0; i < scene.tag_count(); ++i) {
        OcclusionWindow w;
        w.tag_index = i;
        const SightAngles ang = sight_angles(scene, i);
        w.theta_a = ang.theta_a;
        w.theta_b = ang.theta_b;

        // Rise of each antenna->endpoint segment across the swept strip.
        double y_lo = std::numeric_limits<double>::infinity();
        double y_hi = -std::numeric_limits<double>::infinity();
        bool any = false;
        const auto [e1, e2] = scene.tag_endpoints(i);
        const Vec2 a = scene.antenna;
        auto accumulate = [&](const Vec2& e) {
            const double xr_lo = std::min(a.x, e.x);
            const double xr_hi = std::max(a.x, e.x);
            const double c_lo = std::max(xr_lo, strip_lo);
            const double c_hi = std::min(xr_hi, strip_hi);
            if (c_lo > c_hi) return;
            any = true;
            if (e.x == a.x) {
                // Segment parallel to the walk: the whole y extent is exposed.
                y_lo = std::min(y_lo, std::min(a.y, e.y));
                y_hi = std::max(y_hi, std::max(a.y, e.y));
                return;
            }
            const double slope = (e.y - a.y) / (e.x - a.x);
            const double y1 = a.y + (c_lo - a.x) * slope;
            const double y2 = a.y + (c_hi - a.x) * slope;
            y_lo = std::min(y_lo, std::min(y1, y2));
            y_hi = std::max(y_hi, std::max(y1, y2));
        };
        accumulate(e1);
        if (scene.l_tag > 0.0) accumulate(e2);

        if (!any) {
            w.d_in = 0.0;
            w.t_start = w.t_end = obj.t_enter;
            w.clamped = true;
        } else {
            w.d_in = (y_hi - y_lo) + obj.d_h;
            w.t_start = obj.t_enter + y_lo / obj.v;
            w.t_end = w.t_start + w.d_in / obj.v;
        }
        out.push_back(w);
    }
    return out;
}

} // namespace rfgate
