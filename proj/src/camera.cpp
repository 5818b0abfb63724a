#include "frng/geom/camera.hpp"

#include <cmath>

#include <json.hpp>

#include "frng/core/rng.hpp"
#include "frng/core/tensor.hpp"

namespace frng {

Camera look_at_origin(float azimuth_rad, float elevation_rad, float radius, float focal, int width,
                      int height) {
    Camera cam;
    cam.focal = focal;
    cam.width = width;
    cam.height = height;
    cam.cx = static_cast<float>(width) * 0.5f;
    cam.cy = static_cast<float>(height) * 0.5f;

    const float ce = std::cos(elevation_rad), se = std::sin(elevation_rad);
    const Vec3 pos{radius * ce * std::cos(azimuth_rad), radius * ce * std::sin(azimuth_rad),
                   radius * se};
    const Vec3 fwd = normalize(-pos);
    const Vec3 up{0, 0, 1};
    const Vec3 right = normalize(cross(fwd, up));
    const Vec3 down = cross(fwd, right);
    cam.rot = Mat3::from_rows(right, down, fwd);
    cam.trans = -(cam.rot * pos);
    return cam;
}

std::vector<Camera> make_camera_ring(int n_views, int width, int height, float focal, float radius,
                                     std::uint64_t seed) {
    FRNG_REQUIRE(n_views >= 2, "camera ring: at least 2 views required");
    FRNG_REQUIRE(n_views <= 12, "camera ring: more than 12 views unsupported");
    constexpr float deg = 3.14159265358979323846f / 180.0f;
    std::vector<Camera> cams;
    const int equatorial = std::min(n_views, 4);
    for (int i = 0; i < equatorial; ++i)
        cams.push_back(look_at_origin(static_cast<float>(i) * 90.0f * deg, 0.0f, radius, focal, width, height));

    Pcg32 rng(seed, /*stream=*/0x72696e67);
    float base = 0.0f;
    for (int i = 4; i < n_views; ++i) {
        const int k = i - 4;
        if (k % 2 == 0) base = rng.uniform(0.0f, 360.0f);
        const float az = base + static_cast<float>(k % 2) * 180.0f;
        cams.push_back(look_at_origin(az * deg, 45.0f * deg, radius, focal, width, height));
    }
    return cams;
}

std::string camera_to_json(const Camera& cam) {
    nlohmann::json j;
    j["width"] = cam.width;
    j["height"] = cam.height;
    j["intrinsics"] = {cam.focal, 0.0f, cam.cx, 0.0f, cam.focal, cam.cy, 0.0f, 0.0f, 1.0f};
    std::vector<float> w2c(16, 0.0f);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) w2c[r * 4 + c] = cam.rot.m[r * 3 + c];
        w2c[r * 4 + 3] = (&cam.trans.x)[r];
    }
    w2c[15] = 1.0f;
    j["world_to_camera"] = w2c;
    return j.dump(2);
}

Camera camera_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Camera cam;
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    const auto k = j.at("intrinsics").get<std::vector<float>>();
    FRNG_REQUIRE(k.size() == 9, "camera json: 3x3 intrinsics required");
    cam.focal = k[0];
    cam.cx = k[2];
    cam.cy = k[5];
    const auto m = j.at("world_to_camera").get<std::vector<float>>();
    FRNG_REQUIRE(m.size() == 16, "camera json: 4x4 world_to_camera required");
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cam.rot.m[r * 3 + c] = m[r * 4 + c];
        (&cam.trans.x)[r] = m[r * 4 + 3];
    }
    FRNG_REQUIRE(cam.focal > 0, "camera json: focal must be positive");
    return cam;
}

} // namespace frng
