#pragma once

#include <cstddef>
#include <vector>

namespace calciner {

/// Calciner chamber: a cylinder of radius r_c between h_cl and h_cu, with a
/// lower cone narrowing to r_l at y = 0 and an upper cone narrowing to r_u at
/// y = h_tot. The refractory lining extends to r_r and the shell to r_w.
struct GeometrySpec
{
    double h_tot = 33.0;
    double h_cl = 4.0;
    double h_cu = 29.0;
    double r_c = 3.08;
    double r_l = 1.75;
    double r_u = 1.75;
    double r_r = 3.29;
    double r_w = 3.30;
    std::size_t n_v = 5;

    /// Throws ValidationError when the dimensions are inconsistent.
    void validate() const;
    double dy() const { return h_tot / static_cast<double>(n_v); }
    /// Chamber radius at height y (clamped to [0, h_tot]).
    double radius_at(double y) const;
};

struct SegmentGeometry
{
    double y_lo = 0.0;
    double y_hi = 0.0;
    double volume = 0.0;            // chamber V_delta, m^3
    double refractory_volume = 0.0; // m^3
    double shell_volume = 0.0;      // m^3
    double lateral_area = 0.0;      // chamber side area A_c, m^2
    double area_cr = 0.0;           // mixture / refractory interface, m^2
    double area_rw = 0.0;           // refractory / shell interface, m^2
    double area_we = 0.0;           // shell / environment interface, m^2
    double hydraulic_diameter = 0.0;
    /// Curved-wall conduction widths ln(r_{i+1}/r_i) r_i.
    double refractory_width = 0.0;
    double shell_width = 0.0;

    double y_mid() const { return 0.5 * (y_lo + y_hi); }
    /// Segment-average cross sections V / dy.
    double mean_area() const { return volume / (y_hi - y_lo); }
    double mean_refractory_area() const { return refractory_volume / (y_hi - y_lo); }
    double mean_shell_area() const { return shell_volume / (y_hi - y_lo); }
};

/// Uniform partition into spec.n_v segments.
std::vector<SegmentGeometry> segment_partition(const GeometrySpec& spec);

/// Chamber volume between heights a and b for radial offset dr (0 for the
/// chamber, r_r - r_c for the refractory outer surface, ...).
double chamber_volume(const GeometrySpec& spec, double a, double b, double dr = 0.0);
/// Side area of the chamber between heights a and b for radial offset dr.
double lateral_area(const GeometrySpec& spec, double a, double b, double dr = 0.0);
/// Closed form total chamber volume: both full cones plus the cylinder.
double total_chamber_volume(const GeometrySpec& spec);

} // namespace calciner
