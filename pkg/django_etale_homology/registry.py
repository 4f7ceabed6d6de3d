class Registry(dict):
    def for_module(self, modules=None, excluded_modules=None):
        for item in self.values():
            if modules and item.module not in modules:
                continue
            if excluded_modules and item.module in excluded_modules:
                continue
            yield item


suites_registry = Registry()
