use std::io::{Read, Write};

use super::{DataError, PointRecord, SequenceDataset};

pub const CSV_HEADER: &str = "curve_id,point_index,x,y,z,u,curvature,tangent_x,tangent_y,tangent_z";

/// 17 significant digits.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_dataset_csv<W: Write>(dataset: &SequenceDataset, out: W) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let header: Vec<&str> = CSV_HEADER.split(',').collect();
    w.write_record(&header).map_err(csv_err)?;
    for r in dataset.records() {
        w.write_record([
            r.curve_id.to_string(),
            r.point_index.to_string(),
            fmt(r.x),
            fmt(r.y),
            fmt(r.z),
            fmt(r.u),
            fmt(r.curvature),
            fmt(r.tangent_x),
            fmt(r.tangent_y),
            fmt(r.tangent_z),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(input: R) -> Result<SequenceDataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(DataError::Parse { line: 1, message: format!("unexpected header {header:?}") });
    }
    let mut sequences: Vec<Vec<PointRecord>> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| DataError::Parse { line, message };
        if row.len() != 10 {
            return Err(bad(format!("expected 10 fields, found {}", row.len())));
        }
        let int = |k: usize| row[k].trim().parse::<usize>().map_err(|e| bad(format!("field {}: {e}", k + 1)));
        let real = |k: usize| row[k].trim().parse::<f64>().map_err(|e| bad(format!("field {}: {e}", k + 1)));
        let rec = PointRecord {
            curve_id: int(0)?,
            point_index: int(1)?,
            x: real(2)?,
            y: real(3)?,
            z: real(4)?,
            u: real(5)?,
            curvature: real(6)?,
            tangent_x: real(7)?,
            tangent_y: real(8)?,
            tangent_z: real(9)?,
        };
        match sequences.last_mut() {
            Some(seq) if seq[0].curve_id == rec.curve_id => {
                if rec.point_index != seq.len() {
                    return Err(bad(format!("point_index {} out of order", rec.point_index)));
                }
                seq.push(rec);
            }
            _ => {
                if rec.point_index != 0 {
                    return Err(bad(format!("curve {} does not start at point 0", rec.curve_id)));
                }
                if sequences.iter().any(|s| s[0].curve_id == rec.curve_id) {
                    return Err(bad(format!("curve {} is not contiguous", rec.curve_id)));
                }
                sequences.push(vec![rec]);
            }
        }
    }
    SequenceDataset::new(sequences)
}

fn csv_err(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::Io(io),
        kind => DataError::Parse { line, message: format!("{kind:?}") },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dataset_is_header_only() {
        let mut buf = Vec::new();
        write_dataset_csv(&SequenceDataset::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
        let back = read_dataset_csv(CSV_HEADER.as_bytes()).unwrap();
        assert_eq!(back.n_records(), 0);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!("{CSV_HEADER}\n0,0,1,2,3,0,0,1,0,0\n0,1,1,oops,3,0.5,0,1,0,0\n");
        match read_dataset_csv(text.as_bytes()) {
            Err(DataError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("field 4"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{CSV_HEADER}\n0,0,1,2,3\n");
        assert!(matches!(read_dataset_csv(text.as_bytes()), Err(DataError::Parse { line: 2, .. })));
        assert!(matches!(read_dataset_csv("a,b\n".as_bytes()), Err(DataError::Parse { line: 1, .. })));
    }
}
