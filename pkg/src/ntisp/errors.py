class NtispError(Exception):
    """Base class for every error raised by this package."""


class ParseError(NtispError, ValueError):
    def __init__(self, message, line=None, source=None):
        self.message = message
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ValidationError(NtispError, ValueError):
    pass


class TooLargeError(NtispError):
    pass
