//! Spatial-slice figures: for a fixed time the domain cross-section, the
//! null-cone trace, the reference point, and the boundary coloured by region
//! membership (yellow outside the cone exterior, red for the highlighted
//! region, amber for the rest of the trace).

use std::fmt::Write as _;

use ultracarl_core::domain::{DomainModel, SpatialShape};
use ultracarl_core::geometry::{to_null_frame, PointRef, SpaceTimePoint};
use ultracarl_core::regions::gamma_eps_bracket;
use ultracarl_core::weight::CarlemanParams;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const SEGMENTS: usize = 720;

pub struct SliceStyle {
    /// "gamma" paints `Gamma_p^eps` red; "trace" paints all of `dU ∩ D_p`.
    pub highlight: String,
}

/// Render one spatial slice at the given time vector (2-D sections only).
pub fn render_slice(
    dom: &DomainModel,
    params: &CarlemanParams,
    t: &[f64],
    style: &SliceStyle,
    config_hash: &str,
    seed: u64,
) -> anyhow::Result<String> {
    let sig = dom.sig();
    anyhow::ensure!(sig.n() == 2, "figure slices need n = 2");

    let (mut lo, mut hi) = dom.spatial_bbox();
    // Keep the reference point in view even when it sits outside the domain.
    for j in 0..2 {
        lo[j] = lo[j].min(params.p.x[j]);
        hi[j] = hi[j].max(params.p.x[j]);
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let pad = 0.2 * span;
    let world = [lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad];
    let scale = (SIZE - 2.0 * MARGIN) / (world[2] - world[0]).max(world[3] - world[1]);
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN + (x - world[0]) * scale,
            SIZE - MARGIN - (y - world[1]) * scale,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, "<!-- config_hash: {config_hash} seed: {seed} -->");
    let _ = writeln!(
        svg,
        "<!-- t = {t:?}, p = ({:?}, {:?}), a = {}, eps = {} -->",
        params.p.t, params.p.x, params.a, params.eps
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#
    );

    // Domain cross-section.
    match dom.shape() {
        SpatialShape::Ball { .. } | SpatialShape::MovingBall { .. } => {
            let (c, rho) = dom.ball_at(t[0]).expect("ball-like shape");
            let (cx, cy) = to_px(c[0], c[1]);
            let _ = writeln!(
                svg,
                r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="#f2f2f2" stroke="none"/>"##,
                rho * scale
            );
        }
        SpatialShape::Box { lo, hi } => {
            let (x0, y1) = to_px(lo[0], lo[1]);
            let (x1, y0) = to_px(hi[0], hi[1]);
            let _ = writeln!(
                svg,
                r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#f2f2f2" stroke="none"/>"##,
                x1 - x0,
                y1 - y0
            );
        }
    }

    // Null-cone trace |x - x(p)| = tau_p in this slice.
    let tau: f64 = t
        .iter()
        .zip(&params.p.t)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let (pcx, pcy) = to_px(params.p.x[0], params.p.x[1]);
    if tau > 0.0 {
        let _ = writeln!(
            svg,
            r##"<circle cx="{pcx:.2}" cy="{pcy:.2}" r="{:.2}" fill="none" stroke="#888888" stroke-width="1.2" stroke-dasharray="6,4"/>"##,
            tau * scale
        );
    }

    // Boundary segments coloured by membership.
    let boundary_points = boundary_polyline(dom, t[0]);
    for w in boundary_points.windows(2) {
        let (x0, y0) = (w[0][0], w[0][1]);
        let (x1, y1) = (w[1][0], w[1][1]);
        // Segment colour probed at its leading vertex, which lies on the
        // boundary (chord midpoints do not).
        let q = SpaceTimePoint::new(t.to_vec(), vec![x0, y0]);
        let color = segment_color(dom, params, q.as_ref(), style);
        let (px0, py0) = to_px(x0, y0);
        let (px1, py1) = to_px(x1, y1);
        let _ = writeln!(
            svg,
            r#"<line x1="{px0:.2}" y1="{py0:.2}" x2="{px1:.2}" y2="{py1:.2}" stroke="{color}" stroke-width="5" stroke-linecap="round"/>"#
        );
    }

    // Reference point marker.
    let _ = writeln!(
        svg,
        r##"<circle cx="{pcx:.2}" cy="{pcy:.2}" r="5" fill="#1f4fd7"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="24" font-family="monospace" font-size="14">t1 = {}</text>"#,
        t[0]
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn boundary_polyline(dom: &DomainModel, t1: f64) -> Vec<[f64; 2]> {
    match dom.shape() {
        SpatialShape::Ball { .. } | SpatialShape::MovingBall { .. } => {
            let (c, rho) = dom.ball_at(t1).expect("ball-like shape");
            (0..=SEGMENTS)
                .map(|k| {
                    let theta = k as f64 / SEGMENTS as f64 * std::f64::consts::TAU;
                    [c[0] + rho * theta.cos(), c[1] + rho * theta.sin()]
                })
                .collect()
        }
        SpatialShape::Box { lo, hi } => {
            let corners = [
                [lo[0], lo[1]],
                [hi[0], lo[1]],
                [hi[0], hi[1]],
                [lo[0], hi[1]],
                [lo[0], lo[1]],
            ];
            let per_edge = SEGMENTS / 4;
            let mut pts = Vec::new();
            for e in 0..4 {
                let (a, b) = (corners[e], corners[e + 1]);
                for k in 0..per_edge {
                    let s = k as f64 / per_edge as f64;
                    pts.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                }
            }
            pts.push(corners[0]);
            pts
        }
    }
}

fn segment_color(
    dom: &DomainModel,
    params: &CarlemanParams,
    q: PointRef<'_>,
    style: &SliceStyle,
) -> &'static str {
    let Ok(frame) = to_null_frame(q, &params.p, dom.sig()) else {
        return "#cccccc";
    };
    if frame.f <= 0.0 {
        return "#f4c842"; // outside the cone exterior
    }
    if style.highlight == "trace" {
        return "#d62728";
    }
    // Highlight Gamma_p^eps within the trace.
    let member = (|| -> anyhow::Result<bool> {
        let nf = dom.normal_f(q, &params.p)?;
        let nr = dom.normal_r(q, &params.p)?;
        Ok(gamma_eps_bracket(params.eps, frame.f, frame.r, nf, nr) > 0.0)
    })()
    .unwrap_or(false);
    if member {
        "#d62728"
    } else {
        "#ff9147"
    }
}
