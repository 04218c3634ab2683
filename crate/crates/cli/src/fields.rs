//! Turning command-line field specs into grid data.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use casimir_lab::fieldexpr::{eval_on_grid, parse, Expr, Var};
use casimir_lab::forms3::io::{read_records, write_records, FieldRecord};
use casimir_lab::forms3::{Form, Grid, ScalarField};

use crate::error::CliError;

/// Fraction of spectral energy above the dealiasing cutoff that triggers a
/// resolution warning.
pub const TAIL_WARNING: f64 = 1e-8;

pub const DEFAULT_PROFILE: &str = "0.3*sin(2*pi*z) + 0.1*cos(4*pi*z)";
pub const DEFAULT_SCALE: &str = "exp(0.2*sin(2*pi*(x+y)))";

pub fn parse_expr(flag: &str, src: &str) -> Result<Expr, CliError> {
    parse(src).map_err(|e| CliError::parse(flag, src, e))
}

/// Profiles of graph foliations may only depend on `z`.
pub fn parse_profile(flag: &str, src: &str) -> Result<Expr, CliError> {
    let e = parse_expr(flag, src)?;
    if e.uses(Var::X) || e.uses(Var::Y) {
        return Err(CliError::Usage(format!("{flag}: profile `{src}` must depend on z only")));
    }
    Ok(e)
}

pub fn grid(n: usize) -> Result<Grid, CliError> {
    Grid::new(n).map_err(|e| CliError::Usage(format!("--grid {n}: {e}")))
}

/// Sample an expression, warning when the grid does not resolve it.
pub fn sample(label: &str, e: &Expr, grid: Grid) -> Result<ScalarField, CliError> {
    let field = eval_on_grid(e, grid).map_err(|err| CliError::Usage(format!("{label}: {err}")))?;
    let tail = field.spectrum().tail_fraction();
    if tail > TAIL_WARNING {
        log::warn!(
            "{label}: {:.1e} of the spectral energy lies above the dealiasing cutoff at n = {}; the field may be non-periodic or under-resolved",
            tail,
            grid.n()
        );
    }
    Ok(field)
}

/// Split on commas outside parentheses.
fn split_components(spec: &str) -> Vec<(usize, &str)> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in spec.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push((start, &spec[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push((start, &spec[start..]));
    parts
}

/// A 1-form from `"ex, ey, ez"` (coefficients of dx, dy, dz) or from a
/// container file. Vector fields in a container are lowered with the flat
/// metric.
pub fn one_form(flag: &str, spec: &str, grid: Grid) -> Result<Form, CliError> {
    let path = Path::new(spec.trim());
    if path.extension().is_some_and(|e| e == "f3rm") || (path.is_file() && !spec.contains(',')) {
        return one_form_from_file(path, grid);
    }
    let parts = split_components(spec);
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "{flag}: expected three comma-separated components or a .f3rm file, got {} component(s)",
            parts.len()
        )));
    }
    let mut comps = Vec::with_capacity(3);
    for (axis, (start, text)) in parts.into_iter().enumerate() {
        let e = parse(text).map_err(|err| CliError::parse(flag, spec, shift(err, start)))?;
        comps.push(sample(&format!("{flag}[{axis}]"), &e, grid)?);
    }
    Ok(Form::new(1, comps).expect("three components"))
}

fn shift(err: casimir_lab::fieldexpr::ExprError, by: usize) -> casimir_lab::fieldexpr::ExprError {
    use casimir_lab::fieldexpr::ExprError::*;
    match err {
        UnknownIdentifier { name, offset } => UnknownIdentifier { name, offset: offset + by },
        Arity { name, offset } => Arity { name, offset: offset + by },
        Unbalanced { offset } => Unbalanced { offset: offset + by },
        Unexpected { found, offset } => Unexpected { found, offset: offset + by },
        Number { text, offset } => Number { text, offset: offset + by },
        other => other,
    }
}

fn one_form_from_file(path: &Path, grid: Grid) -> Result<Form, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let records = read_records(BufReader::new(file)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let form = match records.into_iter().next() {
        Some(FieldRecord::Form(f)) if f.rank() == 1 => f,
        Some(FieldRecord::Vector(v)) => v.flat(),
        Some(FieldRecord::Form(f)) => {
            return Err(CliError::Usage(format!(
                "{}: first record is a {}-form, expected a 1-form",
                path.display(),
                f.rank()
            )))
        }
        None => return Err(CliError::Usage(format!("{}: no records", path.display()))),
    };
    if form.grid() != grid {
        log::warn!(
            "{}: using the stored grid n = {} instead of n = {}",
            path.display(),
            form.grid().n(),
            grid.n()
        );
    }
    Ok(form)
}

pub fn dump(path: &Path, records: &[FieldRecord]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_records(BufWriter::new(file), records).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
