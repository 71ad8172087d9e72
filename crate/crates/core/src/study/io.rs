use std::io::{BufRead, Read, Write};

use super::model::PosteriorDraw;
use super::{StudyError, TrialRecord};

pub fn write_trials_jsonl<W: Write>(mut w: W, records: &[TrialRecord]) -> Result<(), StudyError> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| StudyError::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one record per non-blank line; errors carry the 1-based line number.
pub fn read_trials_jsonl<R: BufRead>(r: R) -> Result<Vec<TrialRecord>, StudyError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrialRecord = serde_json::from_str(&line).map_err(|e| StudyError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        rec.validate().map_err(|message| StudyError::Parse { line: i + 1, message })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_draws_csv<W: Write>(w: W, draws: &[PosteriorDraw]) -> Result<(), StudyError> {
    let mut wr = csv::Writer::from_writer(w);
    for d in draws {
        wr.serialize(d)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_draws_csv<R: Read>(r: R) -> Result<Vec<PosteriorDraw>, StudyError> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rd.deserialize().enumerate() {
        let d: PosteriorDraw = row.map_err(|e| StudyError::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{child_ids, design_trials, simulate_minigame, GenParams};
    use super::*;

    #[test]
    fn trials_round_trip_with_expected_fields() {
        let specs = design_trials(&child_ids(2), 1).unwrap();
        let recs = simulate_minigame(&specs, &GenParams::default(), 2).unwrap();
        let mut buf = Vec::new();
        write_trials_jsonl(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let mut keys: Vec<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            ["censored", "child_id", "condition", "errors", "phoneme", "seed", "session", "source", "time_ms"]
        );
        assert_eq!(first["source"], "sim");
        assert_eq!(read_trials_jsonl(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn bad_lines_report_their_number() {
        let good = r#"{"child_id":"c01","phoneme":"R","condition":"letter","session":1,"errors":0,"censored":false,"time_ms":900.0,"seed":1,"source":"live"}"#;
        let bad_json = format!("{good}\n\n{{oops\n");
        match read_trials_jsonl(bad_json.as_bytes()) {
            Err(StudyError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let inconsistent = good.replace("\"errors\":0", "\"errors\":3");
        match read_trials_jsonl(format!("{good}\n{inconsistent}").as_bytes()) {
            Err(StudyError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn draws_csv_has_named_columns() {
        let d = PosteriorDraw {
            chain: 1,
            iter: 7,
            b0: 0.5,
            b_cond: -0.3,
            sd_child_int: 0.4,
            sd_child_slope: 0.9,
            corr_child: 0.1,
            sd_item_int: 0.2,
            sd_item_slope: Some(0.1),
            corr_item: Some(-0.2),
            sigma: None,
        };
        let mut buf = Vec::new();
        write_draws_csv(&mut buf, std::slice::from_ref(&d)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "chain,iter,b0,bCond,sdChildInt,sdChildSlope,corrChild,sdItemInt,sdItemSlope,corrItem,sigma\n"
        ));
        assert_eq!(read_draws_csv(&buf[..]).unwrap(), vec![d]);
    }
}
