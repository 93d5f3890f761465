//! C ABI for embedding the detection layers in other languages.
//!
//! The surface is deliberately small: open a handle over a built dataset
//! directory (for the encoding schema) plus the two trained model files,
//! classify raw NSL-KDD record lines against a chosen layer, free the
//! handle. All functions return [`CgStatus`]; no Rust panic crosses the
//! boundary. The generated header lands in `include/careguard.h`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use careguard::cli::MISUSE_SCHEMA_FILE;
use careguard::ids::{anomaly_classify, hybrid_classify, misuse_classify, Outcome, Verdict};
use careguard::nslkdd::{FeatureSchema, TrafficRecord};
use careguard::svm::{load_model, BinaryModel, MulticlassModel};

/// Status code of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A file could not be read.
    Io = 3,
    /// The record line or a model/schema file did not parse.
    Parse = 4,
    /// A model file was structurally valid but unusable (wrong kind,
    /// version or checksum).
    Model = 5,
    /// Unexpected internal failure.
    Internal = 6,
}

/// Which detection layer classifies the record.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgLayer {
    Anomaly = 0,
    Misuse = 1,
    Hybrid = 2,
}

/// Classification result. `attack_class` is a NUL-terminated name, empty
/// for normal verdicts; `corrected` is non-zero when the hybrid decision
/// unit overturned an anomaly positive.
#[repr(C)]
pub struct CgVerdict {
    pub is_attack: i32,
    pub corrected: i32,
    pub attack_class: [c_char; 32],
}

/// Opaque handle over the loaded layer stack.
pub struct CgIds {
    schema: FeatureSchema,
    anomaly: BinaryModel,
    misuse: MulticlassModel,
}

/// Version of the library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn cg_status_message(status: CgStatus) -> *const c_char {
    let message: &'static str = match status {
        CgStatus::Ok => "ok\0",
        CgStatus::NullArgument => "a required pointer argument was null\0",
        CgStatus::InvalidUtf8 => "a string argument was not valid UTF-8\0",
        CgStatus::Io => "a file could not be read\0",
        CgStatus::Parse => "a record line or data file did not parse\0",
        CgStatus::Model => "a model file was unusable\0",
        CgStatus::Internal => "internal error\0",
    };
    message.as_ptr() as *const c_char
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for reads.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, CgStatus> {
    if ptr.is_null() {
        return Err(CgStatus::NullArgument);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| CgStatus::InvalidUtf8)
}

fn open_impl(dataset_dir: &str, anomaly_path: &str, misuse_path: &str) -> Result<CgIds, CgStatus> {
    let schema_path = Path::new(dataset_dir).join(MISUSE_SCHEMA_FILE);
    if !schema_path.exists() {
        return Err(CgStatus::Io);
    }
    let schema = FeatureSchema::load(&schema_path).map_err(|_| CgStatus::Parse)?;
    let anomaly = match load_model(Path::new(anomaly_path)) {
        Ok(model) => model.as_binary().cloned().ok_or(CgStatus::Model)?,
        Err(careguard::svm::SvmError::Io { .. }) => return Err(CgStatus::Io),
        Err(_) => return Err(CgStatus::Model),
    };
    let misuse = match load_model(Path::new(misuse_path)) {
        Ok(model) => model.as_multiclass().cloned().ok_or(CgStatus::Model)?,
        Err(careguard::svm::SvmError::Io { .. }) => return Err(CgStatus::Io),
        Err(_) => return Err(CgStatus::Model),
    };
    Ok(CgIds {
        schema,
        anomaly,
        misuse,
    })
}

/// Loads the encoding schema from a built dataset directory and the two
/// trained models, returning a handle through `out`.
///
/// # Safety
/// The three path arguments must be null or NUL-terminated strings valid
/// for reads; `out` must be a valid pointer to a `*mut CgIds`.
#[no_mangle]
pub unsafe extern "C" fn cg_ids_open(
    dataset_dir: *const c_char,
    anomaly_model: *const c_char,
    misuse_model: *const c_char,
    out: *mut *mut CgIds,
) -> CgStatus {
    if out.is_null() {
        return CgStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let (dir, anomaly, misuse) = match (
        read_str(dataset_dir),
        read_str(anomaly_model),
        read_str(misuse_model),
    ) {
        (Ok(d), Ok(a), Ok(m)) => (d, a, m),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
    };
    match catch_unwind(|| open_impl(dir, anomaly, misuse)) {
        Ok(Ok(ids)) => {
            *out = Box::into_raw(Box::new(ids));
            CgStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => CgStatus::Internal,
    }
}

fn classify_impl(ids: &CgIds, layer: CgLayer, line: &str) -> Result<Verdict, CgStatus> {
    let record = TrafficRecord::parse_flexible(line, 1).map_err(|_| CgStatus::Parse)?;
    let encoded = ids.schema.encode(&record);
    let verdict = match layer {
        CgLayer::Anomaly => anomaly_classify(&ids.anomaly, &encoded),
        CgLayer::Misuse => misuse_classify(&ids.misuse, &encoded),
        CgLayer::Hybrid => hybrid_classify(&ids.anomaly, &ids.misuse, &encoded),
    };
    verdict.map_err(|_| CgStatus::Model)
}

fn fill_verdict(out: &mut CgVerdict, verdict: &Verdict) {
    out.is_attack = i32::from(verdict.outcome.is_attack());
    out.corrected = i32::from(verdict.corrected);
    out.attack_class = [0; 32];
    if let Outcome::Attack(name) = &verdict.outcome {
        let truncated = CString::new(&name[..name.len().min(31)]).unwrap_or_default();
        for (slot, byte) in out
            .attack_class
            .iter_mut()
            .zip(truncated.as_bytes_with_nul())
        {
            *slot = *byte as c_char;
        }
    }
}

/// Classifies one comma-separated record line (41 features, optionally
/// followed by a label and difficulty) with the chosen layer.
///
/// # Safety
/// `ids` must be a handle from [`cg_ids_open`] not yet freed; `line` must be
/// null or a NUL-terminated string valid for reads; `out` must be a valid
/// pointer to a `CgVerdict`.
#[no_mangle]
pub unsafe extern "C" fn cg_ids_classify_line(
    ids: *const CgIds,
    layer: CgLayer,
    line: *const c_char,
    out: *mut CgVerdict,
) -> CgStatus {
    if ids.is_null() || out.is_null() {
        return CgStatus::NullArgument;
    }
    let line = match read_str(line) {
        Ok(line) => line,
        Err(status) => return status,
    };
    let ids = &*ids;
    match catch_unwind(AssertUnwindSafe(|| classify_impl(ids, layer, line))) {
        Ok(Ok(verdict)) => {
            fill_verdict(&mut *out, &verdict);
            CgStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => CgStatus::Internal,
    }
}

/// Releases a handle. Accepts null.
///
/// # Safety
/// `ids` must be null or a handle from [`cg_ids_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_ids_free(ids: *mut CgIds) {
    if !ids.is_null() {
        drop(Box::from_raw(ids));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use careguard::nslkdd::NORMAL_LABEL;
    use careguard::svm::{save_model, KernelSpec, SavedModel};
    use std::ffi::CString;

    const LINE: &str = "0,tcp,http,SF,215,45076,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,1,1,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,10,1.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00";

    fn stub_binary(bias: f64) -> BinaryModel {
        BinaryModel {
            support_vectors: vec![],
            dual_coefficients: vec![],
            bias,
            kernel: KernelSpec::linear(),
            class_pair: ("attack".into(), NORMAL_LABEL.into()),
        }
    }

    fn stub_misuse(winner: &str) -> MulticlassModel {
        let mut classes = vec!["smurf".to_string(), NORMAL_LABEL.to_string()];
        classes.sort();
        let bias = if winner == NORMAL_LABEL { -1.0 } else { 1.0 };
        MulticlassModel {
            classes: classes.clone(),
            models: vec![BinaryModel {
                support_vectors: vec![],
                dual_coefficients: vec![],
                bias: if classes[0] == NORMAL_LABEL {
                    -bias
                } else {
                    bias
                },
                kernel: KernelSpec::linear(),
                class_pair: (classes[0].clone(), classes[1].clone()),
            }],
        }
    }

    /// Dataset dir with a schema fitted on one parsed line, plus two stub
    /// model files; no training involved.
    fn fixture(
        anomaly_bias: f64,
        misuse_winner: &str,
    ) -> (tempfile::TempDir, CString, CString, CString) {
        let dir = tempfile::tempdir().unwrap();
        let record = TrafficRecord::parse_labeled(&format!("{LINE},normal,20"), 1).unwrap();
        let schema = FeatureSchema::fit(std::slice::from_ref(&record)).unwrap();
        schema.save(&dir.path().join(MISUSE_SCHEMA_FILE)).unwrap();
        let anomaly_path = dir.path().join("anomaly.json");
        save_model(
            &SavedModel::Binary(stub_binary(anomaly_bias)),
            &anomaly_path,
        )
        .unwrap();
        let misuse_path = dir.path().join("misuse.json");
        save_model(
            &SavedModel::Multiclass(stub_misuse(misuse_winner)),
            &misuse_path,
        )
        .unwrap();
        let c = |p: &Path| CString::new(p.display().to_string()).unwrap();
        let dataset = c(dir.path());
        let anomaly = c(&anomaly_path);
        let misuse = c(&misuse_path);
        (dir, dataset, anomaly, misuse)
    }

    fn open(dataset: &CString, anomaly: &CString, misuse: &CString) -> *mut CgIds {
        let mut handle: *mut CgIds = ptr::null_mut();
        let status = unsafe {
            cg_ids_open(
                dataset.as_ptr(),
                anomaly.as_ptr(),
                misuse.as_ptr(),
                &mut handle,
            )
        };
        assert_eq!(status, CgStatus::Ok);
        assert!(!handle.is_null());
        handle
    }

    fn classify(handle: *const CgIds, layer: CgLayer, line: &str) -> (CgStatus, CgVerdict) {
        let c_line = CString::new(line).unwrap();
        let mut verdict = CgVerdict {
            is_attack: -1,
            corrected: -1,
            attack_class: [0; 32],
        };
        let status = unsafe { cg_ids_classify_line(handle, layer, c_line.as_ptr(), &mut verdict) };
        (status, verdict)
    }

    fn class_name(verdict: &CgVerdict) -> String {
        let bytes: Vec<u8> = verdict
            .attack_class
            .iter()
            .take_while(|b| **b != 0)
            .map(|b| *b as u8)
            .collect();
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn classifies_across_all_three_layers() {
        // Anomaly flags everything; misuse confirms smurf.
        let (_dir, dataset, anomaly, misuse) = fixture(0.5, "smurf");
        let handle = open(&dataset, &anomaly, &misuse);

        let (status, verdict) = classify(handle, CgLayer::Anomaly, LINE);
        assert_eq!(status, CgStatus::Ok);
        assert_eq!(verdict.is_attack, 1);
        assert_eq!(class_name(&verdict), "attack");

        let (status, verdict) = classify(handle, CgLayer::Misuse, LINE);
        assert_eq!(status, CgStatus::Ok);
        assert_eq!(class_name(&verdict), "smurf");

        let (status, verdict) = classify(handle, CgLayer::Hybrid, LINE);
        assert_eq!(status, CgStatus::Ok);
        assert_eq!(verdict.is_attack, 1);
        assert_eq!(verdict.corrected, 0);
        assert_eq!(class_name(&verdict), "smurf");

        unsafe { cg_ids_free(handle) };
    }

    #[test]
    fn hybrid_reports_corrected_overturns() {
        // Anomaly flags, misuse says normal: corrected normal verdict.
        let (_dir, dataset, anomaly, misuse) = fixture(0.5, NORMAL_LABEL);
        let handle = open(&dataset, &anomaly, &misuse);
        let (status, verdict) = classify(handle, CgLayer::Hybrid, LINE);
        assert_eq!(status, CgStatus::Ok);
        assert_eq!(verdict.is_attack, 0);
        assert_eq!(verdict.corrected, 1);
        assert_eq!(class_name(&verdict), "");
        unsafe { cg_ids_free(handle) };
    }

    #[test]
    fn labeled_lines_also_classify() {
        let (_dir, dataset, anomaly, misuse) = fixture(-0.5, NORMAL_LABEL);
        let handle = open(&dataset, &anomaly, &misuse);
        let labeled = format!("{LINE},normal,20");
        let (status, verdict) = classify(handle, CgLayer::Anomaly, &labeled);
        assert_eq!(status, CgStatus::Ok);
        assert_eq!(verdict.is_attack, 0);
        unsafe { cg_ids_free(handle) };
    }

    #[test]
    fn null_and_malformed_arguments_report_status_codes() {
        let (_dir, dataset, anomaly, misuse) = fixture(0.5, "smurf");
        let mut handle: *mut CgIds = ptr::null_mut();
        let status =
            unsafe { cg_ids_open(ptr::null(), anomaly.as_ptr(), misuse.as_ptr(), &mut handle) };
        assert_eq!(status, CgStatus::NullArgument);
        let status = unsafe {
            cg_ids_open(
                dataset.as_ptr(),
                anomaly.as_ptr(),
                misuse.as_ptr(),
                ptr::null_mut(),
            )
        };
        assert_eq!(status, CgStatus::NullArgument);

        let handle = open(&dataset, &anomaly, &misuse);
        let (status, _) = classify(handle, CgLayer::Anomaly, "1,2,3");
        assert_eq!(status, CgStatus::Parse);
        let status =
            unsafe { cg_ids_classify_line(handle, CgLayer::Anomaly, ptr::null(), ptr::null_mut()) };
        assert_eq!(status, CgStatus::NullArgument);
        unsafe { cg_ids_free(handle) };
        unsafe { cg_ids_free(ptr::null_mut()) };
    }

    #[test]
    fn missing_and_wrong_files_report_status_codes() {
        let (_dir, dataset, anomaly, misuse) = fixture(0.5, "smurf");
        let missing = CString::new("/nonexistent/model.json").unwrap();
        let mut handle: *mut CgIds = ptr::null_mut();
        let status = unsafe {
            cg_ids_open(
                dataset.as_ptr(),
                missing.as_ptr(),
                misuse.as_ptr(),
                &mut handle,
            )
        };
        assert_eq!(status, CgStatus::Io);

        // Swapped model kinds are rejected as unusable models.
        let status = unsafe {
            cg_ids_open(
                dataset.as_ptr(),
                misuse.as_ptr(),
                anomaly.as_ptr(),
                &mut handle,
            )
        };
        assert_eq!(status, CgStatus::Model);
    }

    #[test]
    fn version_and_status_messages_are_static_strings() {
        let version = unsafe { CStr::from_ptr(cg_version()) };
        assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
        let message = unsafe { CStr::from_ptr(cg_status_message(CgStatus::Parse)) };
        assert!(message.to_str().unwrap().contains("parse"));
    }

    #[test]
    fn generated_header_covers_the_surface() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("careguard.h");
        let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
        for symbol in [
            "cg_ids_open",
            "cg_ids_classify_line",
            "cg_ids_free",
            "CgVerdict",
            "CgStatus",
        ] {
            assert!(text.contains(symbol), "header misses {symbol}");
        }
    }
}
