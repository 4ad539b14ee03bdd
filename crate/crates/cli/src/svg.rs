//! Deterministic SVG rendering of episode trajectories: red pursuer and green
//! evader polylines, blue scouts, grey obstacle discs, square arena border.

use std::collections::BTreeMap;
use std::fmt::Write;

use pursuit_core::metrics::StepRow;
use pursuit_core::{Obstacle, Role};

fn role_color(role: Role) -> &'static str {
    match role {
        Role::Pursuer => "red",
        Role::Evader => "green",
        Role::Scout => "blue",
    }
}

/// Render one episode's rows. Output bytes are a pure function of the input.
/// World y points up, SVG y points down, so y is negated.
pub fn render(rows: &[StepRow], obstacles: &[Obstacle], half_extent: f64) -> String {
    let margin = 0.25;
    let extent = half_extent + margin;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.4} {:.4} {:.4} {:.4}">"#,
        -extent,
        -extent,
        2.0 * extent,
        2.0 * extent
    );
    let _ = writeln!(
        svg,
        r#"  <rect x="{0:.4}" y="{0:.4}" width="{1:.4}" height="{1:.4}" fill="white"/>"#,
        -extent,
        2.0 * extent
    );
    let _ = writeln!(
        svg,
        r#"  <rect x="{0:.4}" y="{0:.4}" width="{1:.4}" height="{1:.4}" fill="none" stroke="black" stroke-width="0.02"/>"#,
        -half_extent,
        2.0 * half_extent
    );
    for o in obstacles {
        let _ = writeln!(
            svg,
            r#"  <circle cx="{:.4}" cy="{:.4}" r="{:.4}" fill="grey"/>"#,
            o.center.x, -o.center.y, o.radius
        );
    }

    let mut by_agent: BTreeMap<usize, Vec<&StepRow>> = BTreeMap::new();
    for row in rows {
        by_agent.entry(row.agent_id).or_default().push(row);
    }
    for (agent_id, agent_rows) in &by_agent {
        let color = role_color(agent_rows[0].role);
        if agent_rows.len() > 1 {
            let points: Vec<String> = agent_rows
                .iter()
                .map(|r| format!("{:.4},{:.4}", r.position.x, -r.position.y))
                .collect();
            let _ = writeln!(
                svg,
                r#"  <polyline data-agent="{}" data-role="{}" points="{}" fill="none" stroke="{}" stroke-width="0.03"/>"#,
                agent_id,
                agent_rows[0].role,
                points.join(" "),
                color
            );
        }
        // Dot marker at the final (or only) position.
        let last = agent_rows.last().unwrap();
        let _ = writeln!(
            svg,
            r#"  <circle data-agent="{}" data-role="{}" cx="{:.4}" cy="{:.4}" r="0.06" fill="{}"/>"#,
            agent_id,
            last.role,
            last.position.x,
            -last.position.y,
            color
        );
    }
    svg.push_str("</svg>\n");
    svg
}
