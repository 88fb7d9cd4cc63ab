// expect: UnbalancedParens
using UnityEngine;

public class Mixer : MonoBehaviour
{
    private void Start()
    {
        float v = Mathf.Clamp(1f, 0f, 2f];
    }
}
