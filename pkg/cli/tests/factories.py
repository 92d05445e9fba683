import factory


class LayerFactory(factory.DictFactory):
    name = factory.Sequence(lambda n: f"blocks.{n}.proj")
    split_axis = 1
    rank = 2


class ManifestFactory(factory.DictFactory):
    layers = factory.List([factory.SubFactory(LayerFactory), factory.SubFactory(LayerFactory)])
    lambdas = factory.LazyFunction(lambda: [200.0, 50.0, 10.0, 2.0, 0.5])
    seed = 7
