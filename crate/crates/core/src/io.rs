//! CSV export for bisection grids, trajectories and bracket tables.
//!
//! Every writer emits a header row and one row per sample, floats in shortest
//! round-trip form so that identical inputs give identical bytes.

use crate::algebroid::SampledSection;
use crate::bisection::Bisection;
use crate::error::{Error, Result};
use crate::groupoid::{Arrow, Groupoid, GroupoidDescriptor};
use std::io::Write;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn row(w: &mut csv::Writer<impl Write>, cells: impl IntoIterator<Item = String>) -> Result<()> {
    w.write_record(cells.into_iter().collect::<Vec<_>>()).map_err(csv_err)
}

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |k| format!("{prefix}{k}"))
}

fn nums(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| x.to_string())
}

/// Columns `x*`, `beta*`, `g*`: grid point, `β(σ(x))` and the arrow coordinates.
pub fn write_bisection_grid(out: impl Write, sigma: &Bisection) -> Result<()> {
    let form = sigma.grid_form()?;
    let d = sigma.groupoid().base().dim();
    let c = sigma.groupoid().coord_dim();
    let mut w = csv::Writer::from_writer(out);
    row(&mut w, names("x", d).chain(names("beta", d)).chain(names("g", c)))?;
    for ((x, b), a) in form.points.iter().zip(&form.beta).zip(&form.arrows) {
        row(&mut w, nums(x).chain(nums(b)).chain(nums(&a.coords)))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Columns `t`, `beta*`, `alpha*`, `g*`: time, target and source base points, arrow coordinates.
pub fn write_trajectory(out: impl Write, gpd: &GroupoidDescriptor, times: &[f64], arrows: &[Arrow]) -> Result<()> {
    if times.len() != arrows.len() {
        return Err(Error::Precondition(format!("{} times for {} arrows", times.len(), arrows.len())));
    }
    let d = gpd.base().dim();
    let c = gpd.coord_dim();
    let mut w = csv::Writer::from_writer(out);
    row(&mut w, std::iter::once("t".to_string()).chain(names("beta", d)).chain(names("alpha", d)).chain(names("g", c)))?;
    for (t, g) in times.iter().zip(arrows) {
        row(
            &mut w,
            std::iter::once(t.to_string()).chain(nums(&gpd.target(g))).chain(nums(&gpd.source(g))).chain(nums(&g.coords)),
        )?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Columns `x*`, `X*`, `Y*`, `B*`: grid point, the two input sections and their bracket,
/// all sampled in the same unit charts.
pub fn write_bracket_table(out: impl Write, x: &SampledSection, y: &SampledSection, bracket: &SampledSection) -> Result<()> {
    if x.points != y.points || x.points != bracket.points {
        return Err(Error::Precondition("bracket table columns are sampled on different grids".into()));
    }
    let d = x.points.first().map_or(0, |p| p.len());
    let c = x.vectors.first().map_or(0, |v| v.len());
    let mut w = csv::Writer::from_writer(out);
    row(&mut w, names("x", d).chain(names("X", c)).chain(names("Y", c)).chain(names("B", c)))?;
    for k in 0..x.points.len() {
        row(&mut w, nums(&x.points[k]).chain(nums(&x.vectors[k])).chain(nums(&y.vectors[k])).chain(nums(&bracket.vectors[k])))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{bracket_samples, AlgebroidSection};
    use crate::groupoid::PairGroupoid;

    #[test]
    fn grid_csv_shape() {
        let s = Bisection::circle_map("x + 0.1*sin(x)").unwrap().with_grid(8);
        let mut buf = Vec::new();
        write_bisection_grid(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x0,beta0,g0,g1");
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1], "0,0,0,0");
    }

    #[test]
    fn bracket_table() {
        let g: GroupoidDescriptor = PairGroupoid::circle().into();
        let x = AlgebroidSection::pair(&g, &["sin(x)"]).unwrap();
        let y = AlgebroidSection::pair(&g, &["cos(x)"]).unwrap();
        let sx = SampledSection::sample(&g, &x, 4).unwrap();
        let sy = SampledSection::sample(&g, &y, 4).unwrap();
        let b = bracket_samples(&g, &x, &y, 4).unwrap();
        let mut buf = Vec::new();
        write_bracket_table(&mut buf, &sx, &sy, &b).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "x0,X0,X1,Y0,Y1,B0,B1");
        assert_eq!(text.lines().count(), 5);
    }
}
