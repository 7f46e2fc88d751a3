#include "calciner/geometry.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "calciner/error.h"

namespace calciner {

namespace {

constexpr double kPi = std::numbers::pi;

double frustum_volume(double h, double r1, double r2)
{
    return kPi / 3.0 * h * (r1 * r1 + r2 * r2 + r1 * r2);
}

double frustum_side(double h, double r1, double r2)
{
    return kPi * (r1 + r2) * std::sqrt(h * h + (r1 - r2) * (r1 - r2));
}

// Visits the cone/cylinder pieces of [a, b] as (height, radius at lower end,
// radius at upper end).
template <typename F>
void for_each_piece(const GeometrySpec& g, double a, double b, double dr, F&& f)
{
    a = std::clamp(a, 0.0, g.h_tot);
    b = std::clamp(b, 0.0, g.h_tot);
    const double breaks[4] = {0.0, g.h_cl, g.h_cu, g.h_tot};
    for (int s = 0; s < 3; ++s) {
        double lo = std::max(a, breaks[s]);
        double hi = std::min(b, breaks[s + 1]);
        if (hi <= lo) {
            continue;
        }
        f(hi - lo, g.radius_at(lo) + dr, g.radius_at(hi) + dr);
    }
}

} // namespace

void GeometrySpec::validate() const
{
    auto bad = [](const std::string& what) { throw ValidationError("geometry: " + what); };
    if (!(h_tot > 0.0 && h_cl > 0.0 && h_cl < h_cu && h_cu < h_tot)) {
        bad("require 0 < h_cl < h_cu < h_tot");
    }
    if (!(r_l > 0.0 && r_u > 0.0 && r_l <= r_c && r_u <= r_c)) {
        bad("require 0 < r_l, r_u <= r_c");
    }
    if (!(r_c < r_r && r_r < r_w)) {
        bad("require r_c < r_r < r_w");
    }
    if (n_v < 1) {
        bad("n_v must be at least 1");
    }
}

double GeometrySpec::radius_at(double y) const
{
    y = std::clamp(y, 0.0, h_tot);
    if (y < h_cl) {
        return r_l + (r_c - r_l) * y / h_cl;
    }
    if (y > h_cu) {
        return r_c - (r_c - r_u) * (y - h_cu) / (h_tot - h_cu);
    }
    return r_c;
}

double chamber_volume(const GeometrySpec& spec, double a, double b, double dr)
{
    double v = 0.0;
    for_each_piece(spec, a, b, dr, [&](double h, double r1, double r2) {
        v += (r1 == r2) ? kPi * r1 * r1 * h : frustum_volume(h, r1, r2);
    });
    return v;
}

double lateral_area(const GeometrySpec& spec, double a, double b, double dr)
{
    double area = 0.0;
    for_each_piece(spec, a, b, dr, [&](double h, double r1, double r2) {
        area += (r1 == r2) ? 2.0 * kPi * r1 * h : frustum_side(h, r1, r2);
    });
    return area;
}

double total_chamber_volume(const GeometrySpec& spec)
{
    const double rc = spec.r_c;
    return kPi * rc * rc * (spec.h_cu - spec.h_cl) + frustum_volume(spec.h_cl, spec.r_l, rc) +
           frustum_volume(spec.h_tot - spec.h_cu, rc, spec.r_u);
}

std::vector<SegmentGeometry> segment_partition(const GeometrySpec& spec)
{
    spec.validate();
    const double dy = spec.dy();
    const double dr_r = spec.r_r - spec.r_c;
    const double dr_w = spec.r_w - spec.r_c;

    std::vector<SegmentGeometry> segs(spec.n_v);
    for (std::size_t k = 0; k < spec.n_v; ++k) {
        SegmentGeometry& s = segs[k];
        s.y_lo = dy * static_cast<double>(k);
        s.y_hi = (k + 1 == spec.n_v) ? spec.h_tot : dy * static_cast<double>(k + 1);
        s.volume = chamber_volume(spec, s.y_lo, s.y_hi);
        const double v_r = chamber_volume(spec, s.y_lo, s.y_hi, dr_r);
        const double v_w = chamber_volume(spec, s.y_lo, s.y_hi, dr_w);
        s.refractory_volume = v_r - s.volume;
        s.shell_volume = v_w - v_r;
        s.lateral_area = lateral_area(spec, s.y_lo, s.y_hi);
        s.area_cr = s.lateral_area;
        s.area_rw = lateral_area(spec, s.y_lo, s.y_hi, dr_r);
        s.area_we = lateral_area(spec, s.y_lo, s.y_hi, dr_w);
        s.hydraulic_diameter = 4.0 * s.volume / s.lateral_area;
        s.refractory_width = std::log(spec.r_r / spec.r_c) * spec.r_c;
        s.shell_width = std::log(spec.r_w / spec.r_r) * spec.r_r;
    }
    return segs;
}

} // namespace calciner
