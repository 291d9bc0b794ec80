//! Square grids whose boundary vertices lead to exits.

use std::collections::BTreeMap;

use crate::graph::{Instance, MultiGraph, VertexId, VertexKind, Variant};

use super::{id, ReductionError};

fn cell(r: usize, c: usize) -> VertexId {
    id(format!("g{r}_{c}"))
}

/// A `rows` x `cols` grid. Corners get two exits, other boundary vertices one;
/// every exit edge has its own exit vertex. The start defaults to the center.
pub fn grid_instance(rows: usize, cols: usize, start: Option<(usize, usize)>) -> Result<Instance, ReductionError> {
    if rows < 2 || cols < 2 {
        return Err(ReductionError::Params(format!("grid needs at least 2x2, got {rows}x{cols}")));
    }
    let (sr, sc) = start.unwrap_or((rows / 2, cols / 2));
    if sr >= rows || sc >= cols {
        return Err(ReductionError::Params(format!("start ({sr},{sc}) outside the grid")));
    }
    let mut g = MultiGraph::new();
    let mut layout = BTreeMap::new();
    for r in 0..rows {
        for c in 0..cols {
            g.add_vertex(cell(r, c), VertexKind::Regular)?;
            layout.insert(cell(r, c), [c as f64, r as f64]);
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            if r + 1 < rows {
                g.add_edge(cell(r, c), cell(r + 1, c), 1)?;
            }
            if c + 1 < cols {
                g.add_edge(cell(r, c), cell(r, c + 1), 1)?;
            }
            let sides = [
                (r == 0, "n", [0.0, -1.0]),
                (r + 1 == rows, "s", [0.0, 1.0]),
                (c == 0, "w", [-1.0, 0.0]),
                (c + 1 == cols, "e", [1.0, 0.0]),
            ];
            for (on, tag, d) in sides {
                if on {
                    let x = id(format!("x{r}_{c}{tag}"));
                    g.add_vertex(x.clone(), VertexKind::Exit)?;
                    g.add_edge(cell(r, c), x.clone(), 1)?;
                    layout.insert(x, [c as f64 + d[0] * 0.8, r as f64 + d[1] * 0.8]);
                }
            }
        }
    }
    let mut inst = Instance::new(g, cell(sr, sc), Variant::Nemesis);
    inst.layout = Some(layout);
    Ok(inst)
}

/// Verifies the grid shape and the boundary exit rule.
pub fn check_grid(inst: &Instance, rows: usize, cols: usize) -> Result<(), Vec<String>> {
    let g = &inst.graph;
    let mut errors = Vec::new();
    let regular = g.vertices().filter(|(_, k)| *k == VertexKind::Regular).count();
    if regular != rows * cols {
        errors.push(format!("expected {} regular vertices, found {regular}", rows * cols));
    }
    let exits = g.exits().count();
    if exits != 2 * (rows + cols) {
        errors.push(format!("expected {} exits, found {exits}", 2 * (rows + cols)));
    }
    for x in g.exits() {
        if g.degree(x) != 1 {
            errors.push(format!("exit {x} does not have degree 1"));
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            let v = cell(r, c);
            if !g.contains(&v) {
                errors.push(format!("missing cell {v}"));
                continue;
            }
            let boundary = [r == 0, r + 1 == rows, c == 0, c + 1 == cols].iter().filter(|b| **b).count();
            let exit_edges: u32 = g.neighbors(&v).filter(|(y, _)| g.is_exit(y)).map(|(_, m)| m).sum();
            if exit_edges as usize != boundary {
                errors.push(format!("{v} has {exit_edges} exit edges, expected {boundary}"));
            }
            let inner = g.neighbors(&v).filter(|(y, _)| !g.is_exit(y)).count();
            let expected = [r > 0, r + 1 < rows, c > 0, c + 1 < cols].iter().filter(|b| **b).count();
            if inner != expected {
                errors.push(format!("{v} has {inner} grid neighbors, expected {expected}"));
            }
        }
    }
    if !g.is_simple() {
        errors.push("grid is not simple".into());
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_exit_vertices(inst: &Instance) -> usize {
        let g = &inst.graph;
        g.vertex_ids()
            .filter(|v| !g.is_exit(v))
            .filter(|v| g.neighbors(v).filter(|(y, _)| g.is_exit(y)).count() == 2)
            .count()
    }

    #[test]
    fn counts() {
        let g3 = grid_instance(3, 3, None).unwrap();
        check_grid(&g3, 3, 3).unwrap();
        assert_eq!(g3.graph.exits().count(), 12);
        assert_eq!(two_exit_vertices(&g3), 4);
        assert_eq!(g3.start, VertexId::from("g1_1"));

        let g2 = grid_instance(2, 2, None).unwrap();
        assert_eq!(two_exit_vertices(&g2), 4);

        let g23 = grid_instance(2, 3, Some((0, 0))).unwrap();
        check_grid(&g23, 2, 3).unwrap();
        let one_exit = g23
            .graph
            .vertex_ids()
            .filter(|v| !g23.graph.is_exit(v))
            .filter(|v| g23.graph.neighbors(v).filter(|(y, _)| g23.graph.is_exit(y)).count() == 1)
            .count();
        assert_eq!(one_exit, 2);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(grid_instance(1, 5, None).is_err());
        assert!(grid_instance(3, 3, Some((3, 0))).is_err());
    }
}
