"""Exception hierarchy shared by all rfsquash modules."""


class RfsquashError(Exception):
    """Base class for all errors raised by this package."""


class DataError(RfsquashError):
    """Bad or inconsistent input data (files, columns, shapes, fingerprints)."""


class NumericError(RfsquashError):
    """Numeric failure: non-finite values, overflow on narrowing, solver breakdown."""


class CodecError(RfsquashError):
    """Base class for serialization failures."""


class InvalidMagicError(CodecError):
    """The byte stream does not start with the RFSQ magic."""


class UnsupportedVersionError(CodecError):
    """The envelope declares a format version this build does not understand."""


class ChecksumMismatchError(CodecError):
    """Payload CRC-32 does not match the stored checksum."""


class TruncatedPayloadError(CodecError):
    """The byte stream ends before the declared payload/trailer is complete."""
