//! C ABI over the discocirc compiler.
//!
//! Documents and circuits are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a [`DcStatus`];
//! on failure the message is kept per thread and can be fetched with
//! [`dc_last_error_message`]. Strings returned by the library are released
//! with [`dc_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use discocirc::circuit::Circuit;
use discocirc::ingest::{load_document, Document, Lexicon};
use discocirc::pipeline::{document_circuit, parse_sentences, split_text, PipelineConfig};
use discocirc::sim::simulate;
use discocirc::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Format = 3,
    InvalidDiagram = 4,
    NoParse = 5,
    CapExceeded = 6,
    UnexpandedFrame = 7,
    Simulation = 8,
    InvalidConfig = 9,
    BufferSize = 10,
    Io = 11,
    Panic = 12,
    Other = 13,
}

/// A parsed document with its coreference chains.
pub struct DcDocument(Document);

/// A compiled parameterised circuit.
pub struct DcCircuit(Circuit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> DcStatus {
    match e {
        Error::Format { .. } => DcStatus::Format,
        Error::InvalidDiagram { .. } => DcStatus::InvalidDiagram,
        Error::NoParse { .. } | Error::UnknownWord { .. } | Error::SentenceTooLong { .. } => DcStatus::NoParse,
        Error::CapExceeded { .. } => DcStatus::CapExceeded,
        Error::UnexpandedFrame { .. } => DcStatus::UnexpandedFrame,
        Error::ZeroNorm { .. } | Error::UnboundSymbol(_) => DcStatus::Simulation,
        Error::InvalidConfig(_) => DcStatus::InvalidConfig,
        Error::Io(_) => DcStatus::Io,
        _ => DcStatus::Other,
    }
}

struct Fail(DcStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(format!("{}: {e}", e.kind()));
        Fail(status_of(&e))
    }
}

fn fail(status: DcStatus, msg: impl Into<String>) -> Fail {
    set_error(msg);
    Fail(status)
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DcStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("internal panic");
            DcStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(fail(DcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(DcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `out` must be null or valid for a pointer write.
unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(fail(DcStatus::NullPointer, "output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// # Safety
/// `h` must be null or a live handle of type `T`.
unsafe fn borrow<'a, T>(h: *const T, what: &str) -> Result<&'a T, Fail> {
    h.as_ref()
        .ok_or_else(|| fail(DcStatus::NullPointer, format!("{what} is null")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Copy of the last error raised on this thread, or null. Free with
/// [`dc_string_free`].
#[no_mangle]
pub extern "C" fn dc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads an interchange document from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_document_load(path: *const c_char, out: *mut *mut DcDocument) -> DcStatus {
    guard(|| {
        let path = text(path, "path")?;
        put(out, DcDocument(load_document(path)?))
    })
}

/// Parses an interchange document from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_document_from_json(json: *const c_char, out: *mut *mut DcDocument) -> DcStatus {
    guard(|| {
        let json = text(json, "json")?;
        put(out, DcDocument(Document::from_json(json)?))
    })
}

/// Parses plain text with the built-in lexicon and resolves pronouns.
///
/// # Safety
/// `plain` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_document_from_text(plain: *const c_char, out: *mut *mut DcDocument) -> DcStatus {
    guard(|| {
        let plain = text(plain, "text")?;
        let doc = parse_sentences(&split_text(plain), &Lexicon::builtin())?;
        put(out, DcDocument(doc))
    })
}

/// Number of sentences, or 0 for a null handle.
///
/// # Safety
/// `doc` must be null or a live document handle.
#[no_mangle]
pub unsafe extern "C" fn dc_document_sentence_count(doc: *const DcDocument) -> usize {
    doc.as_ref().map_or(0, |d| d.0.sentences.len())
}

/// # Safety
/// `doc` must be null or a document handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_document_free(doc: *mut DcDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Runs the pipeline down to a circuit. `config_json` is a pipeline
/// configuration object; null or `"{}"` selects the defaults.
///
/// # Safety
/// `doc` must be a live document handle, `config_json` null or a
/// NUL-terminated string, and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_compile(
    doc: *const DcDocument,
    config_json: *const c_char,
    out: *mut *mut DcCircuit,
) -> DcStatus {
    guard(|| {
        let doc = borrow(doc, "document")?;
        let cfg: PipelineConfig = if config_json.is_null() {
            PipelineConfig::default()
        } else {
            serde_json::from_str(text(config_json, "config")?)
                .map_err(|e| fail(DcStatus::InvalidConfig, format!("config: {e}")))?
        };
        let lex = Lexicon::builtin();
        put(out, DcCircuit(document_circuit(&doc.0, Some(&lex), &cfg)?))
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_circuit_from_json(json: *const c_char, out: *mut *mut DcCircuit) -> DcStatus {
    guard(|| {
        let json = text(json, "json")?;
        put(out, DcCircuit(Circuit::from_json(json)?))
    })
}

/// Serialises a circuit; free the result with [`dc_string_free`].
///
/// # Safety
/// `circuit` must be a live circuit handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dc_circuit_to_json(circuit: *const DcCircuit, out: *mut *mut c_char) -> DcStatus {
    guard(|| {
        let c = borrow(circuit, "circuit")?;
        if out.is_null() {
            return Err(fail(DcStatus::NullPointer, "output pointer is null"));
        }
        *out = owned_string(c.0.to_json());
        Ok(())
    })
}

/// # Safety
/// `circuit` must be null or a live circuit handle.
#[no_mangle]
pub unsafe extern "C" fn dc_circuit_qubit_count(circuit: *const DcCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.n_qubits)
}

/// Number of outcomes in the output distribution, `2^outputs`.
///
/// # Safety
/// `circuit` must be null or a live circuit handle.
#[no_mangle]
pub unsafe extern "C" fn dc_circuit_outcome_count(circuit: *const DcCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| 1usize << c.0.outputs.len())
}

/// Simulates the circuit. `params_json` maps symbols to values and may be
/// null to use the circuit's initial values. `probs` receives the
/// renormalised output distribution and must hold exactly
/// [`dc_circuit_outcome_count`] entries; `success` (nullable) receives the
/// postselection success probability.
///
/// # Safety
/// `circuit` must be a live circuit handle, `params_json` null or a
/// NUL-terminated string, `probs` valid for `len` writes and `success` null
/// or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dc_simulate(
    circuit: *const DcCircuit,
    params_json: *const c_char,
    probs: *mut f64,
    len: usize,
    success: *mut f64,
) -> DcStatus {
    guard(|| {
        let c = borrow(circuit, "circuit")?;
        let params: BTreeMap<String, f64> = if params_json.is_null() {
            BTreeMap::new()
        } else {
            serde_json::from_str(text(params_json, "params")?)
                .map_err(|e| fail(DcStatus::Format, format!("params: {e}")))?
        };
        if probs.is_null() {
            return Err(fail(DcStatus::NullPointer, "probs is null"));
        }
        let sim = simulate(&c.0, &params)?;
        if sim.distribution.len() != len {
            return Err(fail(
                DcStatus::BufferSize,
                format!("buffer holds {len}, distribution has {}", sim.distribution.len()),
            ));
        }
        std::slice::from_raw_parts_mut(probs, len).copy_from_slice(&sim.distribution);
        if !success.is_null() {
            *success = sim.success_probability;
        }
        Ok(())
    })
}

/// # Safety
/// `circuit` must be null or a circuit handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_circuit_free(circuit: *mut DcCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}
