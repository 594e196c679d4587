//! Convex hull of a pedestrian group and the robot's distance to it.
use groupnav::geometry::{convex_hull, distance_to_polygon, Vec2};

fn main() -> groupnav::Result<()> {
    let group = [Vec2::new(0.0, 0.0), Vec2::new(1.2, 0.1), Vec2::new(0.6, 0.9), Vec2::new(0.5, 0.4)];
    let hull = convex_hull(&group)?;
    println!("hull vertices (ccw):");
    for v in hull.vertices() {
        println!("  ({:.2}, {:.2})", v.x, v.y);
    }
    for robot in [Vec2::new(0.6, 0.3), Vec2::new(2.0, 0.5), Vec2::new(0.6, -1.0)] {
        println!("robot at ({:.1}, {:.1}): distance {:.3}", robot.x, robot.y, distance_to_polygon(robot, &hull));
    }

    // a pair degenerates to a segment
    let pair = convex_hull(&group[..2])?;
    println!("pair hull has {} vertices; midpoint distance {:.3}", pair.len(), distance_to_polygon(Vec2::new(0.6, 0.05), &pair));
    Ok(())
}
