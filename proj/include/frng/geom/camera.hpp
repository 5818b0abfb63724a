#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frng/geom/linalg.hpp"

namespace frng {

// Pinhole camera, CV convention: x right, y down, z forward; image row 0 is
// the top of the frame. Extrinsics map world points into camera space.
struct Camera {
    float focal = 64.0f; // pixels
    float cx = 32.0f, cy = 32.0f;
    int width = 64, height = 64;
    Mat3 rot;  // world-to-camera rotation
    Vec3 trans; // world-to-camera translation

    Vec3 position() const { return -(rot.transposed() * trans); }
    Vec3 forward_axis() const { return rot.row(2); }

    Vec3 to_camera(const Vec3& p_world) const { return rot * p_world + trans; }

    // World-space unit direction through the center of pixel (row i, col j);
    // fractional offsets select sub-pixel rays.
    Vec3 ray_dir(float row, float col) const {
        const Vec3 d_cam{(col - cx) / focal, (row - cy) / focal, 1.0f};
        return normalize(rot.transposed() * d_cam);
    }
    Vec3 pixel_center_dir(int row, int col) const {
        return ray_dir(static_cast<float>(row) + 0.5f, static_cast<float>(col) + 0.5f);
    }
};

// Places the camera at (azimuth, elevation) on a sphere of the given radius,
// aimed at the origin with +Z as world up.
Camera look_at_origin(float azimuth_rad, float elevation_rad, float radius, float focal, int width,
                      int height);

// First four cameras sit on the equator at azimuths 0/90/180/270; remaining
// cameras sit at 45 deg elevation in pairs separated by 180 deg azimuth, with
// a seeded jitter shared within each pair.
std::vector<Camera> make_camera_ring(int n_views, int width, int height, float focal, float radius,
                                     std::uint64_t seed);

std::string camera_to_json(const Camera& cam);
Camera camera_from_json(const std::string& text);

} // namespace frng
