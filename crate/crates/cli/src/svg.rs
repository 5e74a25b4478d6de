//! Static overlay plot: initial guess (green), true boundary (red, dashed),
//! reconstruction (blue) and arrows for the incident directions.

use std::f64::consts::PI;
use std::fmt::Write;

use oblique_core::geometry::RadialFunction;

const SIZE: f64 = 480.0;
const SAMPLES: usize = 256;

fn polyline(radial: &dyn RadialFunction) -> Vec<[f64; 2]> {
    (0..SAMPLES)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / SAMPLES as f64;
            let r = radial.radius(t);
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

pub fn overlay(
    initial: &dyn RadialFunction,
    truth: Option<&dyn RadialFunction>,
    reconstruction: &dyn RadialFunction,
    directions: &[f64],
) -> String {
    let curves: Vec<(Vec<[f64; 2]>, &str, &str)> = [
        Some((initial, "green", "")),
        truth.map(|t| (t, "red", " stroke-dasharray=\"6 4\"")),
        Some((reconstruction, "blue", "")),
    ]
    .into_iter()
    .flatten()
    .map(|(c, color, dash)| (polyline(c), color, dash))
    .collect();

    let extent = curves
        .iter()
        .flat_map(|(p, _, _)| p.iter().map(|[x, y]| x.hypot(*y)))
        .fold(0.0_f64, f64::max)
        .max(1e-3);
    // leave room outside the curves for the direction arrows
    let scale = SIZE / 2.0 / (1.6 * extent);
    let px = |[x, y]: [f64; 2]| (SIZE / 2.0 + scale * x, SIZE / 2.0 - scale * y);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    s.push_str(
        "<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" orient=\"auto\">\
         <path d=\"M0,0 L8,4 L0,8 z\" fill=\"black\"/></marker></defs>\n",
    );
    let _ = writeln!(s, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>");
    let c = SIZE / 2.0;
    let _ = writeln!(s, "<path d=\"M0,{c} H{SIZE} M{c},0 V{SIZE}\" stroke=\"#ddd\" stroke-width=\"1\"/>");
    for (points, color, dash) in &curves {
        let coords: Vec<String> = points
            .iter()
            .map(|&p| {
                let (x, y) = px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
            coords.join(" ")
        );
    }
    for &phi in directions {
        // the wave travels along d, so the arrow sits upstream pointing in
        let d = [phi.cos(), phi.sin()];
        let (x0, y0) = px([-1.5 * extent * d[0], -1.5 * extent * d[1]]);
        let (x1, y1) = px([-1.15 * extent * d[0], -1.15 * extent * d[1]]);
        let _ = writeln!(
            s,
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" stroke=\"black\" stroke-width=\"1.5\" marker-end=\"url(#head)\"/>"
        );
    }
    s.push_str("</svg>\n");
    s
}
