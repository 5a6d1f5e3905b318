//! Check hand-built (route, path) pairs against every feasibility
//! constraint with the standalone verifier.
//!
//! ```bash
//! cargo run --example verify_solution
//! ```

use naviformer::nop::{verify_solution, NopInstance, Obstacle, Point, Polyline, Route};

fn straight_path(from: Point, to: Point, step: f64) -> Polyline {
    let total = from.dist(&to);
    let steps = (total / step).ceil() as usize;
    let pts = (0..=steps)
        .map(|i| {
            let t = (i as f64 * step / total).min(1.0);
            Point::new(from.x + (to.x - from.x) * t, from.y + (to.y - from.y) * t)
        })
        .collect();
    Polyline(pts)
}

fn main() -> anyhow::Result<()> {
    let inst = NopInstance::new(
        vec![
            Point::new(0.1, 0.1),
            Point::new(0.45, 0.12),
            Point::new(0.6, 0.55),
            Point::new(0.9, 0.9),
        ],
        vec![0.0, 1.0, 1.0, 0.0],
        vec![Obstacle::new(0.5, 0.5, 0.06)],
        2.5,
        0.02,
    )?;

    // a feasible tour: depot -> node 1 -> node 2 -> end depot, stitched from
    // straight segments that happen to dodge the obstacle
    let mut pts = Vec::new();
    let hops = [0usize, 1, 2, 3];
    for w in hops.windows(2) {
        let seg = straight_path(inst.nodes()[w[0]], inst.nodes()[w[1]], 0.02);
        let skip = usize::from(!pts.is_empty());
        pts.extend(seg.points().iter().skip(skip).copied());
    }
    let path = Polyline(pts);
    let route = Route(vec![0, 1, 2, 3]);
    let report = verify_solution(&inst, &route, &path)?;
    println!("feasible tour: {report}");
    assert!(report.all_pass());

    // an immediate revisit trips the revisit constraint
    let bad_route = Route(vec![0, 1, 1, 3]);
    let report = verify_solution(&inst, &bad_route, &path)?;
    println!("revisit tour:  {report}");
    assert!(!report.no_immediate_revisit);

    // a path through the obstacle trips the collision constraint
    let through = straight_path(inst.nodes()[0], inst.nodes()[3], 0.02);
    let report = verify_solution(&inst, &Route(vec![0, 3]), &through)?;
    println!("through-disc:  {report}");
    assert!(!report.collision_free);

    // malformed routes are structural errors, not constraint failures
    let err = verify_solution(&inst, &Route(vec![0, 99, 3]), &path).unwrap_err();
    println!("malformed:     {err}");
    Ok(())
}
