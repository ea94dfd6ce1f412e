import argparse


class CommandParserFormatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawTextHelpFormatter):
    pass


class CommandParserError(Exception):
    pass


class CommandParserHelp(CommandParserError):
    pass


class CommandParser(argparse.ArgumentParser):
    """An argument parser that raises instead of printing and exiting."""

    def __init__(self, *args, formatter_class=CommandParserFormatter, **kwargs):
        super().__init__(*args, formatter_class=formatter_class, **kwargs)

    def error(self, message):
        raise CommandParserError(f"{self.format_usage()}{self.prog}: error: {message}")

    def print_usage(self, file=None):
        raise CommandParserHelp(self.format_usage())

    def print_help(self, file=None):
        raise CommandParserHelp(self.format_help())

    def exit(self, status=0, message=None):
        pass
