use std::io::Write;

use iga_dispersion::analysis::{EigenfunctionSample, ErrorBudget, SpectrumRow};
use iga_dispersion::dispersion::RatePoint;

pub const SPECTRUM_HEADER: [&str; 8] = [
    "l_over_N",
    "kh_over_pi",
    "ev_rel_err",
    "ef_l2_err",
    "ef_energy_rel_err",
    "energy_mismatch",
    "l2_mismatch",
    "budget_residual",
];

pub const BUDGET_HEADER: [&str; 13] = [
    "mode",
    "j",
    "k",
    "lambda",
    "mu",
    "inner",
    "alignment",
    "ev_rel_err",
    "ef_l2_err",
    "ef_energy_rel_err",
    "energy_mismatch",
    "l2_mismatch",
    "budget_residual",
];

pub const RATE_HEADER: [&str; 4] = ["n_elements", "h", "error", "used"];

pub const EIGENFUNCTION_HEADER: [&str; 3] = ["x", "discrete", "exact"];

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn spectrum(rows: &[SpectrumRow]) -> Self {
        let mut rows = rows.to_vec();
        rows.sort_by(|a, b| a.l_over_n.total_cmp(&b.l_over_n));
        let mut t = Table::new(&SPECTRUM_HEADER);
        for r in rows {
            t.rows.push(
                [
                    r.l_over_n,
                    r.kh_over_pi,
                    r.ev_rel_err,
                    r.ef_l2_err,
                    r.ef_energy_rel_err,
                    r.energy_mismatch,
                    r.l2_mismatch,
                    r.budget_residual,
                ]
                .into_iter()
                .map(num)
                .collect(),
            );
        }
        t
    }

    pub fn budget(budgets: &[ErrorBudget]) -> Self {
        let mut t = Table::new(&BUDGET_HEADER);
        for b in budgets {
            let mut row = vec![
                b.mode.to_string(),
                b.exact.j.to_string(),
                b.exact.k.map(|k| k.to_string()).unwrap_or_default(),
                num(b.exact.lambda),
                num(b.mu),
                num(b.inner),
                format!("{:?}", b.alignment).to_lowercase(),
            ];
            row.extend(
                [
                    b.ev_rel_err,
                    b.ef_l2_err,
                    b.ef_energy_rel_err,
                    b.energy_mismatch,
                    b.l2_mismatch,
                    b.residual,
                ]
                .into_iter()
                .map(num),
            );
            t.rows.push(row);
        }
        t
    }

    pub fn rates(points: &[RatePoint]) -> Self {
        let mut t = Table::new(&RATE_HEADER);
        for p in points {
            t.rows
                .push(vec![p.n_elements.to_string(), num(p.h), num(p.error), p.used.to_string()]);
        }
        t
    }

    pub fn eigenfunction(samples: &[EigenfunctionSample]) -> Self {
        let mut t = Table::new(&EIGENFUNCTION_HEADER);
        for s in samples {
            t.rows.push(vec![num(s.x), num(s.discrete), num(s.exact)]);
        }
        t
    }

    /// Comma separated, LF terminated, header first.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wtr.write_record(&self.header)?;
        for r in &self.rows {
            wtr.write_record(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> csv::Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Table { header, rows })
    }

    /// Column `name` parsed as floats.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }
}
