#pragma once

// Lifting a 2D placement into the scene: pinhole rays, depth-map
// unprojection and first-hit mesh ray casting.

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "octoplace/error.hpp"
#include "octoplace/scene.hpp"

namespace octoplace {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

class Ray {
public:
    /// `direction` is normalized here; a zero or non-finite direction is rejected.
    Ray(Vec3 origin, Vec3 direction) : origin_(origin) {
        const double n = norm(direction);
        if (!(n > 0.0) || !std::isfinite(n)) throw ContractViolation("ray direction must be non-zero and finite");
        direction_ = (1.0 / n) * direction;
    }

    Vec3 origin() const noexcept { return origin_; }
    Vec3 direction() const noexcept { return direction_; }
    Vec3 at(double t) const { return origin_ + t * direction_; }

private:
    Vec3 origin_;
    Vec3 direction_;
};

class TriangleMesh {
public:
    using Face = std::array<int, 3>;

    TriangleMesh() = default;
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> triangles)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
        const int n = static_cast<int>(vertices_.size());
        for (std::size_t i = 0; i < triangles_.size(); ++i) {
            for (int idx : triangles_[i])
                if (idx < 0 || idx >= n)
                    throw FormatError("triangle " + std::to_string(i) + " references missing vertex " +
                                      std::to_string(idx));
            const auto [a, b, c] = corners(i);
            if (!(norm(cross(b - a, c - a)) > 0.0))
                throw FormatError("triangle " + std::to_string(i) + " is degenerate");
        }
    }

    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    const std::vector<Face>& triangles() const noexcept { return triangles_; }

    std::array<Vec3, 3> corners(std::size_t tri) const {
        const auto& f = triangles_[tri];
        return {vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]};
    }

private:
    std::vector<Vec3> vertices_;
    std::vector<Face> triangles_;
};

/// Smallest accepted ray parameter; rejects hits at the ray origin.
inline constexpr double kMinHitDistance = 1e-6;

/// Camera-centered ray through pixel (x, y).
inline Ray pixel_ray(const CameraIntrinsics& intr, double x, double y) {
    intr.validate();
    return Ray({0.0, 0.0, 0.0}, {(x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0});
}

inline Placement3D unproject(const CameraIntrinsics& intr, int x, int y, double depth) {
    return {(x - intr.cx) * depth / intr.fx, (y - intr.cy) * depth / intr.fy, depth};
}

/// Pixels searched for a valid depth when the placement pixel has none.
inline constexpr int kDepthSearchRadius = 5;

/// Unprojects pixel (x, y). A missing depth is replaced by the nearest pixel
/// with valid depth within kDepthSearchRadius (Euclidean; ties in row-major order).
inline Placement3D raycast_depth(const DepthScene& scene, int x, int y) {
    if (!scene.image().contains(x, y))
        throw ContractViolation("pixel (" + std::to_string(x) + "," + std::to_string(y) + ") outside the scene");
    if (const double z = scene.depth(y, x); z > 0.0) return unproject(scene.intrinsics(), x, y, z);

    constexpr int r = kDepthSearchRadius;
    int best_d2 = r * r + 1;
    int best_x = -1;
    int best_y = -1;
    // Row-major scan with a strict comparison keeps the first of equally near pixels.
    for (int yy = y - r; yy <= y + r; ++yy)
        for (int xx = x - r; xx <= x + r; ++xx) {
            if (!scene.image().contains(xx, yy)) continue;
            const int d2 = (xx - x) * (xx - x) + (yy - y) * (yy - y);
            if (d2 < best_d2 && scene.depth(yy, xx) > 0.0) {
                best_d2 = d2;
                best_x = xx;
                best_y = yy;
            }
        }
    if (best_x < 0)
        throw NoDepthError("no valid depth within " + std::to_string(r) + " px of (" + std::to_string(x) + "," +
                           std::to_string(y) + ")");
    return unproject(scene.intrinsics(), best_x, best_y, scene.depth(best_y, best_x));
}

/// Watertight ray/triangle test (shear-and-scale into ray space, then signed
/// edge functions). Returns the ray parameter of the hit, if any.
inline std::optional<double> intersect_triangle(const Ray& ray, const std::array<Vec3, 3>& tri) {
    const Vec3 d = ray.direction();
    int kz = 0;
    if (std::abs(d.y) > std::abs(d[kz])) kz = 1;
    if (std::abs(d.z) > std::abs(d[kz])) kz = 2;
    int kx = (kz + 1) % 3;
    int ky = (kx + 1) % 3;
    if (d[kz] < 0.0) std::swap(kx, ky);

    const double sx = d[kx] / d[kz];
    const double sy = d[ky] / d[kz];
    const double sz = 1.0 / d[kz];

    const Vec3 a = tri[0] - ray.origin();
    const Vec3 b = tri[1] - ray.origin();
    const Vec3 c = tri[2] - ray.origin();

    const double ax = a[kx] - sx * a[kz];
    const double ay = a[ky] - sy * a[kz];
    const double bx = b[kx] - sx * b[kz];
    const double by = b[ky] - sy * b[kz];
    const double cx = c[kx] - sx * c[kz];
    const double cy = c[ky] - sy * c[kz];

    double u = cx * by - cy * bx;
    double v = ax * cy - ay * cx;
    double w = bx * ay - by * ax;
    if (u == 0.0 || v == 0.0 || w == 0.0) {
        // Edge-on in double precision: redo the edge functions wider.
        using L = long double;
        u = static_cast<double>(static_cast<L>(cx) * by - static_cast<L>(cy) * bx);
        v = static_cast<double>(static_cast<L>(ax) * cy - static_cast<L>(ay) * cx);
        w = static_cast<double>(static_cast<L>(bx) * ay - static_cast<L>(by) * ax);
    }
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;

    const double det = u + v + w;
    if (det == 0.0) return std::nullopt;

    const double t = (u * sz * a[kz] + v * sz * b[kz] + w * sz * c[kz]) / det;
    if (!(t > kMinHitDistance)) return std::nullopt;
    return t;
}

struct MeshHit {
    std::size_t triangle = 0;
    double t = 0.0;
    Placement3D point;
};

/// Nearest hit along the ray; exact ties go to the lowest triangle index.
inline std::optional<MeshHit> first_hit(const TriangleMesh& mesh, const Ray& ray) {
    std::optional<MeshHit> best;
    for (std::size_t i = 0; i < mesh.triangles().size(); ++i) {
        const auto t = intersect_triangle(ray, mesh.corners(i));
        if (t && (!best || *t < best->t)) {
            const Vec3 p = ray.at(*t);
            best = MeshHit{i, *t, {p.x, p.y, p.z}};
        }
    }
    return best;
}

inline Placement3D raycast_mesh(const TriangleMesh& mesh, const Ray& ray) {
    const auto hit = first_hit(mesh, ray);
    if (!hit) throw MissError("ray does not intersect the mesh");
    return hit->point;
}

inline Placement3D place3d(const DepthScene& scene, const Placement2D& p) { return raycast_depth(scene, p.x, p.y); }

inline Placement3D place3d(const TriangleMesh& mesh, const CameraIntrinsics& intr, const Placement2D& p) {
    return raycast_mesh(mesh, pixel_ray(intr, p.x, p.y));
}

/// Reads `v` and `f` records of a Wavefront OBJ file (1-based indices;
/// polygons are fan-triangulated; every other record is ignored).
inline TriangleMesh parse_obj(std::istream& in) {
    std::vector<Vec3> vertices;
    std::vector<TriangleMesh::Face> faces;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z)) throw FormatError("obj line " + std::to_string(lineno) + ": bad vertex");
            vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                const auto slash = tok.find('/');
                char* end = nullptr;
                const std::string head = tok.substr(0, slash);
                const long i = std::strtol(head.c_str(), &end, 10);
                if (head.empty() || *end != '\0' || i < 1)
                    throw FormatError("obj line " + std::to_string(lineno) + ": bad face index '" + tok + "'");
                idx.push_back(static_cast<int>(i - 1));
            }
            if (idx.size() < 3) throw FormatError("obj line " + std::to_string(lineno) + ": face needs 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    return TriangleMesh(std::move(vertices), std::move(faces));
}

inline TriangleMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh " + path.string());
    return parse_obj(in);
}

} // namespace octoplace
