#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace rfgate {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Doorway installation in top view.
///
/// Coordinate frame: the doorway line is the x axis, the aperture spans
/// x in [-d_door/2, +d_door/2] at y = 0. Objects cross along +y (the
/// crossing direction). The antenna sits at one aperture edge and the tag
/// board on the far side of the crossing lane, so every antenna-tag sight
/// segment cuts through the lane.
struct Scene {
    double d_door = 2.0;          // aperture width (m)
    double d_set = 0.25;          // tag spacing (m)
    double l_tag = 0.0;           // effective tag reception length (m)
    Vec2 antenna{-1.0, 0.0};
    std::vector<Vec2> tags;

    /// Antenna at the left aperture edge, tag board parallel to the doorway
    /// at y = board_distance, centered on board_center_x.
    static Scene standard_doorway(double d_door = 2.0, int tag_count = 5,
                                  double d_set = 0.25,
                                  double board_distance = 1.0,
                                  double board_center_x = 1.0);

    int tag_count() const { return static_cast<int>(tags.size()); }

    /// Index of the tag closest to the doorway center (0,0); the reference
    /// tag for velocity templates.
    int reference_tag() const;

    /// Endpoints of tag i treated as a segment of length l_tag along the
    /// board direction; both equal the tag point when l_tag == 0.
    std::pair<Vec2, Vec2> tag_endpoints(int tag_index) const;

    void validate() const;
    std::uint64_t digest() const;
};

/// Object crossing the doorway on a straight line along +y at constant
/// speed. l_h spans across the doorway, d_h along the walk; the leading
/// edge is at y = 0 at t_enter.
struct MovingObject {
    double l_h = 0.5;
    double d_h = 0.3;
    double v = 1.0;
    double t_enter = 0.0;
    double path_offset = 0.0;

    void validate(const Scene& scene) const;
};

struct SightAngles {
    double theta_a = 0.0; // smaller elevation (rad)
    double theta_b = 0.0; // larger elevation (rad)
};

/// Interval during which the object fully cuts the sight path to one tag.
struct OcclusionWindow {
    int tag_index = 0;
    double theta_a = 0.0;
    double theta_b = 0.0;
    double d_in = 0.0;    // along-path blockage span (m)
    double t_start = 0.0;
    double t_end = 0.0;
    bool clamped = false; // span was empty or forced up to zero

    bool blocked() const { return !clamped && d_in > 0.0; }
};

/// Elevation of the antenna -> tag-endpoint rays above the doorway line
/// (rad, in [0, pi/2]; pi/2 when a ray runs parallel to the crossing
/// direction). Equal angles for a point tag.
SightAngles sight_angles(const Scene& scene, int tag_index);

/// Along-path blockage span for the paper-frame doorway (antenna at the
/// aperture edge, object centered):
///   (d_door + l_h)/2 * tan(theta_b) - (d_door - l_h)/2 * tan(theta_a) + d_h
/// Negative spans clamp to 0 (reported through *clamped when given).
double impact_distance(const Scene& scene, const MovingObject& obj,
                       double theta_a, double theta_b,
                       bool* clamped = nullptr);

/// d_in / v.
double impact_time(double d_in, double v);

/// One window per tag, ordered by tag index, from the exact segment-vs-swept-
/// strip construction (valid for any antenna placement and path offset).
std::vector<OcclusionWindow> occlusion_windows(const Scene& scene,
                                               const MovingObject& obj);

} // namespace rfgate
