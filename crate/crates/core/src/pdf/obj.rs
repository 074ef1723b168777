//! Small accessors over lopdf objects that follow indirect references.

use lopdf::{Dictionary, Document as PdfFile, Object};

const DEREF_LIMIT: usize = 32;

pub(crate) fn deref<'a>(file: &'a PdfFile, mut obj: &'a Object) -> Option<&'a Object> {
    for _ in 0..DEREF_LIMIT {
        match obj {
            Object::Reference(id) => obj = file.get_object(*id).ok()?,
            _ => return Some(obj),
        }
    }
    None
}

pub(crate) fn dict_get<'a>(file: &'a PdfFile, dict: &'a Dictionary, key: &[u8]) -> Option<&'a Object> {
    dict.get(key).ok().and_then(|o| deref(file, o))
}

pub(crate) fn dict_of<'a>(file: &'a PdfFile, obj: &'a Object) -> Option<&'a Dictionary> {
    match deref(file, obj)? {
        Object::Dictionary(d) => Some(d),
        Object::Stream(s) => Some(&s.dict),
        _ => None,
    }
}

pub(crate) fn name_of(obj: &Object) -> Option<String> {
    obj.as_name().ok().map(|n| String::from_utf8_lossy(n).into_owned())
}

pub(crate) fn num(obj: &Object) -> Option<f64> {
    match obj {
        Object::Integer(i) => Some(*i as f64),
        Object::Real(r) => Some(*r as f64),
        _ => None,
    }
}

pub(crate) fn nums(file: &PdfFile, obj: &Object) -> Option<Vec<f64>> {
    match deref(file, obj)? {
        Object::Array(a) => a.iter().map(|o| deref(file, o).and_then(num)).collect(),
        _ => None,
    }
}

/// Decoded bytes of a stream object.
pub(crate) fn stream_bytes(file: &PdfFile, obj: &Object) -> Option<Vec<u8>> {
    match deref(file, obj)? {
        Object::Stream(s) => s.get_plain_content().ok(),
        _ => None,
    }
}
